#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mfldp/cli/config.hpp"
#include "mfldp/cli/manifest.hpp"

namespace mfldp::cli {

enum ExitCode { ok = 0, other_error = 1, config_error = 2, numerical_error = 3, io_error = 4 };

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"check-model", "sample",  "stationary", "rate",
                                              "ldp",         "tilting", "capital-curve", "metrics"};
  return names;
}

// Runs one command and writes its artifacts plus manifest.json into out_dir.
Manifest run_command(const std::string& command, const RunConfig& cfg, const std::filesystem::path& out_dir,
                     int threads);

// Re-executes a manifest into out_dir; returns the outputs whose hashes differ.
std::vector<std::string> rerun(const std::filesystem::path& manifest_path, const std::filesystem::path& out_dir);

// Full command line entry point, returns the process exit status.
int main_entry(int argc, char** argv);

}  // namespace mfldp::cli
