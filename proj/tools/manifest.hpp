#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "config_file.hpp"

namespace su11::cli {

struct RunManifest {
  std::vector<std::string> command_line;
  std::string subcommand;
  ConfigEntries config;    // options given on the command line or config file; replayable through --config
  ConfigEntries resolved;  // every value the run used, at full precision
  std::uint64_t master_seed = 0;
  double wall_time_s = 0;
  unsigned threads = 1;
  std::string kernel_path;
  std::vector<std::string> outputs;  // checksummed at write time
};

inline constexpr const char* kVersion = "1.0.0";

std::string sha256_file(const std::string& path);
std::string manifest_path_for(const std::string& output);
// Writes the JSON manifest next to the first output; returns its path.
std::string write_manifest(const RunManifest& m);

}  // namespace su11::cli
