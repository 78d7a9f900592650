// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>

#include "tdgemm/block_major.hpp"
#include "tdgemm/config.hpp"
#include "tdgemm/matrix.hpp"

namespace tdgemm {

// Nearest integer, halfway cases away from zero. Used by quantization,
// unpacking and R_max alike.
template <Real T>
inline T round_half_away(T x) noexcept {
  // Same result as std::round, written so loops over it vectorize. Adding
  // and removing 2^(digits-1) rounds |x| to nearest-even; ties that went
  // down are bumped up. Larger magnitudes are already integers.
  constexpr T big = static_cast<T>(std::uint64_t{1} << (std::numeric_limits<T>::digits - 1));
  const T ax = std::fabs(x);
  T r = (ax + big) - big;
  r = (ax - r == static_cast<T>(0.5)) ? r + 1 : r;
  return ax < big ? std::copysign(r, x) : x;
}

// Companded and rounded tile: values[i] = round(c * original[i]), stored as
// exact integers in the native precision.
template <Real T>
struct QuantizedTile {
  Matrix<T> values;
  double compander = 1.0;
};

template <Real T>
QuantizedTile<T> quantize_subblock(const Matrix<T>& tile, double compander);

// Reverse companding of one integer-domain result.
double dequantize(double value, double c_a, double c_b);

// Ceiling of c_a * c_b * L * max|A| * max|B|, the amplitude bound of any
// packed partial result.
double compute_rmax(double c_a, double c_b, std::size_t tile_side, double max_abs_a, double max_abs_b);

// Largest power of two not above 1 / (2 R_max + u_safe). z and 1/z are
// then exact in both native formats.
double compute_z(double rmax, int u_safe);

// The error-free packing bound ceil(log_z[(2 R_max + 1) u_sys] + 1),
// clamped below at 1.
int compute_wef(double z, double rmax, double u_sys);

// Operating point of one subblock pair.
struct PackingConfig {
  PackingMode mode = PackingMode::kSymmetric;
  int w = 1;
  double z = 1.0;
  double c_a = 1.0;
  double c_b = 1.0;
  double rmax = 0.0;

  // Builds a configuration with z chosen by compute_z.
  static PackingConfig make(PackingMode mode, int w, double c_a, double c_b, double rmax, int u_safe);

  // Rejects non-positive companders, w < 1, and any z above the
  // 1 / (2 R_max + u_safe) bound (overlapping fields are never allowed).
  void validate(int u_safe) const;
};

template <Real T>
struct PackedTile {
  PackingMode mode = PackingMode::kSymmetric;
  int w = 1;
  double z = 1.0;
  Matrix<T> values;
};

// Symmetric packing: W consecutive row elements of A with z^0..z^(W-1) and
// W consecutive column elements of B with z^0..z^-(W-1).
template <Real T>
std::pair<PackedTile<T>, PackedTile<T>> pack_symmetric(const QuantizedTile<T>& a, const QuantizedTile<T>& b,
                                                       int w, double z);

// L x L packed product containing the wanted outputs plus W^2 - W side terms.
template <Real T>
Matrix<T> multiply_packed_symmetric(const PackedTile<T>& a, const PackedTile<T>& b);

template <Real T>
Matrix<T> unpack_symmetric(const Matrix<T>& packed, double z);

// Asymmetric packing: W consecutive rows of A folded with z^0..z^(W-1).
template <Real T>
PackedTile<T> pack_asymmetric(const QuantizedTile<T>& a, int w, double z);

template <Real T>
Matrix<T> multiply_packed_asymmetric(const PackedTile<T>& a, const QuantizedTile<T>& b);

// Peels W stacked results per packed element; packed row r yields output
// rows W*r .. W*r + W - 1.
template <Real T>
Matrix<T> unpack_asymmetric(const Matrix<T>& packed, double z, int w);

// pack -> multiply -> unpack on already quantized tiles; returns the
// integer-domain product. W = 1 is a plain multiply followed by rounding.
template <Real T>
Matrix<T> packed_integer_product(const QuantizedTile<T>& a, const QuantizedTile<T>& b, PackingMode mode, int w,
                                 double z);

// Full subblock pipeline: quantize, pack, multiply, unpack, dequantize.
template <Real T>
Matrix<T> packed_subblock_product(const Matrix<T>& a, const Matrix<T>& b, const PackingConfig& config);

// Multiply-accumulates of the packed product for an L x L subblock pair.
std::uint64_t packed_mac_count(PackingMode mode, std::size_t tile_side, int w);

// Elements held by the two packed operands.
std::size_t packed_storage_elements(PackingMode mode, std::size_t tile_side, int w);

}  // namespace tdgemm
