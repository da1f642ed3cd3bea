#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "json.hpp"
#include "su11/core.hpp"

namespace su11::cli {

std::string sha256_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read '" + path + "' for checksumming");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw NumericalError("sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (f) {
    f.read(buf.data(), buf.size());
    if (f.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(f.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string manifest_path_for(const std::string& output) { return output + ".manifest.json"; }

std::string write_manifest(const RunManifest& m) {
  if (m.outputs.empty()) throw ConfigError("manifest needs at least one output");
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["engines"] = {{"analytic", kVersion}, {"gaussian", kVersion}, {"fock", kVersion}, {"tw", kVersion}};
  j["command_line"] = m.command_line;
  j["subcommand"] = m.subcommand;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;
  j["config"] = cfg;
  nlohmann::ordered_json res = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.resolved) res[k] = v;
  j["resolved"] = res;
  j["master_seed"] = m.master_seed;
  j["threads"] = m.threads;
  j["kernel_path"] = m.kernel_path;
  j["wall_time_s"] = m.wall_time_s;
  nlohmann::ordered_json outs = nlohmann::ordered_json::array();
  for (const auto& p : m.outputs) outs.push_back({{"path", p}, {"sha256", sha256_file(p)}});
  j["outputs"] = outs;
  const std::string path = manifest_path_for(m.outputs.front());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write manifest '" + path + "'");
  f << j.dump(2) << '\n';
  return path;
}

}  // namespace su11::cli
