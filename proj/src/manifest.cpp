#include "stlreach/manifest.hpp"

#include "stlreach/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace stlreach {

std::string fnv1a_file_hex(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot hash missing file: " + path);
  std::uint64_t h = 1469598103934665603ull;
  char buf[8192];
  while (is) {
    is.read(buf, sizeof buf);
    std::streamsize n = is.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

void RunManifest::add_output(const std::string &path) {
  FileEntry e;
  e.path = path;
  e.bytes = static_cast<std::uint64_t>(std::filesystem::file_size(path));
  e.fnv64 = fnv1a_file_hex(path);
  outputs.push_back(std::move(e));
}

void RunManifest::write(const std::string &path) const {
  nlohmann::json j;
  j["command"] = command;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["config"] = config;
  j["outputs"] = nlohmann::json::array();
  for (const auto &e : outputs)
    j["outputs"].push_back({{"path", e.path}, {"bytes", e.bytes}, {"fnv64", e.fnv64}});
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os << j.dump(2) << "\n";
}

bool verify_manifest(const std::string &manifest_path, std::string *first_error) {
  std::ifstream is(manifest_path);
  if (!is) {
    if (first_error) *first_error = "missing manifest " + manifest_path;
    return false;
  }
  nlohmann::json j;
  is >> j;
  for (const auto &e : j.at("outputs")) {
    std::string p = e.at("path").get<std::string>();
    if (!std::filesystem::exists(p)) {
      if (first_error) *first_error = "missing output " + p;
      return false;
    }
    if (fnv1a_file_hex(p) != e.at("fnv64").get<std::string>()) {
      if (first_error) *first_error = "hash mismatch for " + p;
      return false;
    }
  }
  return true;
}

} // namespace stlreach
