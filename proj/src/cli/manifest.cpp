// SPDX-License-Identifier: Apache-2.0
#include "cli/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "tdgemm/error.hpp"
#include "tdgemm/matrix_io.hpp"

namespace tdgemm::cli {

std::filesystem::path write_manifest(const RunManifest& m, const std::filesystem::path& dir) {
  nlohmann::json j;
  j["command"] = m.command;
  j["tool_version"] = kToolVersion;
  j["seed"] = m.seed;
  j["engine"] = {{"tile_side", m.tile_side},
                 {"precision", std::string(to_string(m.precision))},
                 {"mode", std::string(to_string(m.mode))},
                 {"u_safe", m.u_safe}};
  j["flags"] = m.flags;
  j["inputs"] = m.input_digests;
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& o : m.outputs) outputs.push_back({{"path", o}, {"digest", file_digest(o)}});
  j["outputs"] = outputs;
  j["timing_outputs"] = m.timing_outputs;

  std::filesystem::create_directories(dir);
  const auto path = dir / ("manifest_" + m.command + ".json");
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  return path;
}

}  // namespace tdgemm::cli
