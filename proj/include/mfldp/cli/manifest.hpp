#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mfldp::cli {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t h);
std::uint64_t hash_file(const std::filesystem::path& p);

struct FileRecord {
  std::string path;  // relative to the output directory for outputs
  std::string hash;
};

struct Manifest {
  std::string command;
  std::string config;  // canonical INI
  std::string config_hash;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string version;
  std::string compiler;
  std::vector<FileRecord> inputs;
  std::vector<FileRecord> outputs;
};

std::string to_json_text(const Manifest& m);
Manifest manifest_from_json_text(const std::string& text);

}  // namespace mfldp::cli
