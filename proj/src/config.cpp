// SPDX-License-Identifier: Apache-2.0
#include "tdgemm/config.hpp"

#include <numeric>
#include <string>

#include "tdgemm/error.hpp"

namespace tdgemm {

std::string_view to_string(Precision p) { return p == Precision::kSingle ? "single" : "double"; }

std::string_view to_string(PackingMode m) { return m == PackingMode::kSymmetric ? "symmetric" : "asymmetric"; }

Precision parse_precision(std::string_view s) {
  if (s == "single") return Precision::kSingle;
  if (s == "double") return Precision::kDouble;
  throw InvalidConfigError("unknown precision '" + std::string(s) + "'");
}

PackingMode parse_mode(std::string_view s) {
  if (s == "symmetric") return PackingMode::kSymmetric;
  if (s == "asymmetric") return PackingMode::kAsymmetric;
  throw InvalidConfigError("unknown packing mode '" + std::string(s) + "'");
}

double unit_roundoff(Precision p) {
  return p == Precision::kSingle ? unit_roundoff<float>() : unit_roundoff<double>();
}

EngineConfig EngineConfig::for_precision(Precision p, std::size_t k, int max_w) {
  EngineConfig c;
  c.b_repr = p == Precision::kSingle ? 4 : 8;
  c.u_sys = unit_roundoff(p);
  c.k = k;
  c.max_w = max_w;
  return c;
}

void EngineConfig::validate() const {
  if (b_repr != 4 && b_repr != 8) throw InvalidConfigError("b_repr must be 4 or 8");
  if (simd_bytes == 0 || simd_bytes % b_repr != 0)
    throw InvalidConfigError("b_repr must divide simd_bytes");
  if (max_w < 1) throw InvalidConfigError("max_w must be at least 1");
  if (k < 1) throw InvalidConfigError("k must be a positive integer");
  if (u_safe < 1) throw InvalidConfigError("u_safe must be at least 1");
  if (!(u_sys > 0 && u_sys < 1)) throw InvalidConfigError("u_sys must lie in (0, 1)");
}

std::size_t compute_tile_side(const EngineConfig& config) {
  config.validate();
  std::size_t lcm = 1;
  for (std::size_t w = 2; w <= static_cast<std::size_t>(config.max_w); ++w) lcm = std::lcm(lcm, w);
  return config.simd_bytes / config.b_repr * config.k * lcm;
}

}  // namespace tdgemm
