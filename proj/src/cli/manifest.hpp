// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tdgemm/config.hpp"

namespace tdgemm::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::size_t tile_side = 0;
  Precision precision = Precision::kSingle;
  PackingMode mode = PackingMode::kSymmetric;
  int u_safe = 50;
  std::map<std::string, std::string> flags;
  std::map<std::string, std::string> input_digests;  // path -> digest
  std::vector<std::string> outputs;
  std::vector<std::string> timing_outputs;  // listed without digest
};

// Writes <dir>/manifest_<command>.json and returns its path. Output files
// listed in the manifest are digested too.
std::filesystem::path write_manifest(const RunManifest& manifest, const std::filesystem::path& dir);

}  // namespace tdgemm::cli
