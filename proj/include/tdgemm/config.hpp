// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>

namespace tdgemm {

enum class Precision : std::uint8_t { kSingle, kDouble };

enum class PackingMode : std::uint8_t { kSymmetric, kAsymmetric };

std::string_view to_string(Precision p);
std::string_view to_string(PackingMode m);
Precision parse_precision(std::string_view s);
PackingMode parse_mode(std::string_view s);

template <class T>
concept Real = std::is_same_v<T, float> || std::is_same_v<T, double>;

template <Real T>
constexpr Precision precision_of() {
  return std::is_same_v<T, float> ? Precision::kSingle : Precision::kDouble;
}

// Unit roundoff of the native format, 2^-p for a p-bit significand.
template <Real T>
constexpr double unit_roundoff() {
  return std::numeric_limits<T>::epsilon() / 2;
}

double unit_roundoff(Precision p);

// Largest integer magnitude below which every integer is exact in T.
template <Real T>
constexpr double exact_integer_limit() {
  return static_cast<double>(std::uint64_t{1} << std::numeric_limits<T>::digits);
}

// Global engine constants.
struct EngineConfig {
  std::size_t simd_bytes = 16;
  std::size_t b_repr = 4;
  int max_w = 4;
  std::size_t k = 1;
  int u_safe = 50;
  double u_sys = 0x1p-24;

  // Defaults for one native precision: b_repr and u_sys follow the format.
  static EngineConfig for_precision(Precision p, std::size_t k = 1, int max_w = 4);

  // Throws InvalidConfigError when an invariant does not hold.
  void validate() const;

  Precision precision() const { return b_repr == 4 ? Precision::kSingle : Precision::kDouble; }
};

// Inner-kernel side: (simd_bytes / b_repr) * k * lcm(2, ..., max_w).
std::size_t compute_tile_side(const EngineConfig& config);

}  // namespace tdgemm
