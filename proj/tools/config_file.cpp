#include "config_file.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "su11/core.hpp"

namespace su11::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string k) {
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

ConfigEntries from_manifest(const std::string& text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(origin + ": not a valid manifest: " + e.what());
  }
  if (!j.contains("config") || !j["config"].is_object()) throw ConfigError(origin + ": manifest has no config object");
  ConfigEntries out;
  for (const auto& [k, v] : j["config"].items()) out.emplace_back(normalize_key(k), v.is_string() ? v.get<std::string>() : v.dump());
  return out;
}

}  // namespace

ConfigEntries parse_config_text(const std::string& text, const std::string& origin) {
  const std::string head = trim(text.substr(0, std::min<std::size_t>(text.size(), 64)));
  if (!head.empty() && head[0] == '{') return from_manifest(text, origin);

  ConfigEntries out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");
    out.emplace_back(normalize_key(key), value);
  }
  return out;
}

ConfigEntries read_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace su11::cli
