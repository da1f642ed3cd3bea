#pragma once

#include <string>
#include <utility>
#include <vector>

namespace su11::cli {

// Ordered key/value pairs. Keys use '-' as separator ("n_total" is read as "n-total").
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// Plain text `key = value` lines with '#' comments, or a run manifest (JSON)
// whose "config" object is replayed. Throws ConfigError with the line number.
ConfigEntries read_config_file(const std::string& path);
ConfigEntries parse_config_text(const std::string& text, const std::string& origin = "<config>");

}  // namespace su11::cli
