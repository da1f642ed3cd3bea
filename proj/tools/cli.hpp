#pragma once

#include <iosfwd>

namespace su11::cli {

// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace su11::cli
