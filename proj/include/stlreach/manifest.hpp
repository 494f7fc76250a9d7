#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace stlreach {

// FNV-1a over the file contents, hex encoded.
std::string fnv1a_file_hex(const std::string &path);

// Record of one CLI run: command, config, and the output files with content
// hashes. Timing diagnostics live in a separate file so manifests stay
// byte-identical across runs with the same seed.
struct RunManifest {
  std::string command;
  std::string scenario;
  std::uint64_t seed = 0;
  nlohmann::json config;
  struct FileEntry {
    std::string path;
    std::uint64_t bytes = 0;
    std::string fnv64;
  };
  std::vector<FileEntry> outputs;

  void add_output(const std::string &path);
  void write(const std::string &path) const;
};

// Checks that every output listed in a manifest file exists and matches its
// recorded content hash.
bool verify_manifest(const std::string &manifest_path, std::string *first_error = nullptr);

} // namespace stlreach
