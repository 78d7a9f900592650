// SPDX-License-Identifier: Apache-2.0
#include "tdgemm/packing.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

namespace tdgemm {

template <Real T>
QuantizedTile<T> quantize_subblock(const Matrix<T>& tile, double compander) {
  if (!(compander > 0) || !std::isfinite(compander)) throw InvalidConfigError("compander must be positive");
  // Companding runs in the native precision; the stored compander is the
  // rounded one actually applied, so dequantization matches it.
  const T c = static_cast<T>(compander);
  if (!(c > 0) || !std::isfinite(c)) throw InvalidConfigError("compander is not representable");
  QuantizedTile<T> q{Matrix<T>(tile.rows(), tile.cols()), static_cast<double>(c)};
  const T limit = static_cast<T>(exact_integer_limit<T>());
  const T* src = tile.values().data();
  T* dst = q.values.values().data();
  const std::size_t n = tile.size();
  // Counted rather than thrown inside the loop so it vectorizes; NaN counts too.
  using Count = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  Count out_of_range = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const T scaled = c * src[i];
    out_of_range += !(std::fabs(scaled) < limit);
    dst[i] = round_half_away(scaled);
  }
  if (out_of_range != 0) throw OverflowError("companded value exceeds the exact integer range");
  return q;
}

double dequantize(double value, double c_a, double c_b) { return value / (c_a * c_b); }

double compute_rmax(double c_a, double c_b, std::size_t tile_side, double max_abs_a, double max_abs_b) {
  return std::ceil(c_a * c_b * static_cast<double>(tile_side) * max_abs_a * max_abs_b);
}

double compute_z(double rmax, int u_safe) {
  if (!(rmax >= 1)) throw InvalidConfigError("compute_z requires R_max >= 1");
  const double bound = 1.0 / (2.0 * rmax + u_safe);
  double z = std::exp2(std::floor(std::log2(bound)));
  while (z > bound) z *= 0.5;
  while (z * 2 <= bound) z *= 2;
  return z;
}

int compute_wef(double z, double rmax, double u_sys) {
  if (!(z > 0 && z < 1)) throw InvalidConfigError("compute_wef requires 0 < z < 1");
  const double bound = std::ceil(std::log((2.0 * rmax + 1.0) * u_sys) / std::log(z) + 1.0);
  return bound < 1 ? 1 : static_cast<int>(bound);
}

PackingConfig PackingConfig::make(PackingMode mode, int w, double c_a, double c_b, double rmax, int u_safe) {
  PackingConfig c;
  c.mode = mode;
  c.w = w;
  c.c_a = c_a;
  c.c_b = c_b;
  c.rmax = rmax;
  c.z = w > 1 ? compute_z(rmax, u_safe) : 1.0;
  c.validate(u_safe);
  return c;
}

void PackingConfig::validate(int u_safe) const {
  if (w < 1) throw InvalidConfigError("W must be at least 1");
  if (!(c_a > 0) || !(c_b > 0)) throw InvalidConfigError("companders must be positive");
  if (w == 1) return;
  if (!(rmax >= 1)) throw InvalidConfigError("packing requires R_max >= 1");
  if (!(z > 0 && z < 1)) throw InvalidConfigError("packing coefficient must lie in (0, 1)");
  if (z > 1.0 / (2.0 * rmax + u_safe))
    throw InvalidConfigError("packing coefficient z exceeds 1/(2 R_max + u_safe); packed fields would overlap");
}

namespace {

void require_divisible(std::size_t n, int w) {
  if (w < 1 || n % static_cast<std::size_t>(w) != 0)
    throw DimensionError("tile dimension " + std::to_string(n) + " is not divisible by W=" + std::to_string(w));
}

}  // namespace

template <Real T>
std::pair<PackedTile<T>, PackedTile<T>> pack_symmetric(const QuantizedTile<T>& a, const QuantizedTile<T>& b,
                                                       int w, double z) {
  const Matrix<T>& qa = a.values;
  const Matrix<T>& qb = b.values;
  if (qa.cols() != qb.rows()) throw DimensionError("symmetric packing operands are not conformable");
  require_divisible(qa.cols(), w);
  const std::size_t inner = qa.cols() / w;
  const T zt = static_cast<T>(z);
  const T zinv = static_cast<T>(1.0 / z);

  PackedTile<T> pa{PackingMode::kSymmetric, w, z, Matrix<T>(qa.rows(), inner)};
  for (std::size_t m = 0; m < qa.rows(); ++m) {
    const T* src = qa.row(m);
    T* dst = pa.values.row(m);
    for (std::size_t n = 0; n < inner; ++n) {
      T acc = src[w * n];
      T scale = 1;
      for (int i = 1; i < w; ++i) {
        scale *= zt;
        acc += scale * src[w * n + i];
      }
      dst[n] = acc;
    }
  }

  PackedTile<T> pb{PackingMode::kSymmetric, w, z, Matrix<T>(inner, qb.cols())};
  for (std::size_t m = 0; m < inner; ++m) {
    T* dst = pb.values.row(m);
    std::copy_n(qb.row(w * m), qb.cols(), dst);
    T scale = 1;
    for (int i = 1; i < w; ++i) {
      scale *= zinv;
      const T* src = qb.row(w * m + i);
      for (std::size_t n = 0; n < qb.cols(); ++n) dst[n] += scale * src[n];
    }
  }
  return {std::move(pa), std::move(pb)};
}

template <Real T>
Matrix<T> multiply_packed_symmetric(const PackedTile<T>& a, const PackedTile<T>& b) {
  if (a.mode != PackingMode::kSymmetric || b.mode != PackingMode::kSymmetric)
    throw InvalidConfigError("symmetric multiply needs symmetric packed operands");
  if (a.w != b.w || a.z != b.z) throw InvalidConfigError("packed operands disagree on W or z");
  return plain_subblock_gemm(a.values, b.values);
}

template <Real T>
Matrix<T> unpack_symmetric(const Matrix<T>& packed, double z) {
  const T zt = static_cast<T>(z);
  const T zinv = static_cast<T>(1.0 / z);
  Matrix<T> out(packed.rows(), packed.cols());
  auto src = packed.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const T u = round_half_away(src[i]);
    dst[i] = u - zinv * round_half_away(zt * u);
  }
  return out;
}

template <Real T>
PackedTile<T> pack_asymmetric(const QuantizedTile<T>& a, int w, double z) {
  const Matrix<T>& qa = a.values;
  require_divisible(qa.rows(), w);
  const T zt = static_cast<T>(z);
  PackedTile<T> pa{PackingMode::kAsymmetric, w, z, Matrix<T>(qa.rows() / w, qa.cols())};
  for (std::size_t m = 0; m < pa.values.rows(); ++m) {
    T* dst = pa.values.row(m);
    std::copy_n(qa.row(w * m), qa.cols(), dst);
    T scale = 1;
    for (int i = 1; i < w; ++i) {
      scale *= zt;
      const T* src = qa.row(w * m + i);
      for (std::size_t n = 0; n < qa.cols(); ++n) dst[n] += scale * src[n];
    }
  }
  return pa;
}

template <Real T>
Matrix<T> multiply_packed_asymmetric(const PackedTile<T>& a, const QuantizedTile<T>& b) {
  if (a.mode != PackingMode::kAsymmetric) throw InvalidConfigError("asymmetric multiply needs an asymmetric operand");
  return plain_subblock_gemm(a.values, b.values);
}

template <Real T>
Matrix<T> unpack_asymmetric(const Matrix<T>& packed, double z, int w) {
  if (w < 1) throw InvalidConfigError("W must be at least 1");
  const T zinv = static_cast<T>(1.0 / z);
  const std::size_t cols = packed.cols();
  Matrix<T> out(packed.rows() * w, cols);
  for (std::size_t m = 0; m < packed.rows(); ++m) {
    const T* src = packed.row(m);
    for (std::size_t n = 0; n < cols; ++n) {
      T residual = src[n];
      T value = round_half_away(residual);
      out(w * m, n) = value;
      for (int i = 1; i < w; ++i) {
        residual = zinv * (residual - value);
        value = round_half_away(residual);
        out(w * m + i, n) = value;
      }
    }
  }
  return out;
}

template <Real T>
Matrix<T> packed_integer_product(const QuantizedTile<T>& a, const QuantizedTile<T>& b, PackingMode mode, int w,
                                 double z) {
  if (w == 1) {
    Matrix<T> r = plain_subblock_gemm(a.values, b.values);
    for (T& v : r.values()) v = round_half_away(v);
    return r;
  }
  if (mode == PackingMode::kSymmetric) {
    auto [pa, pb] = pack_symmetric(a, b, w, z);
    return unpack_symmetric(multiply_packed_symmetric(pa, pb), z);
  }
  const PackedTile<T> pa = pack_asymmetric(a, w, z);
  return unpack_asymmetric(multiply_packed_asymmetric(pa, b), z, w);
}

template <Real T>
Matrix<T> packed_subblock_product(const Matrix<T>& a, const Matrix<T>& b, const PackingConfig& config) {
  const QuantizedTile<T> qa = quantize_subblock(a, config.c_a);
  const QuantizedTile<T> qb = quantize_subblock(b, config.c_b);
  Matrix<T> r = packed_integer_product(qa, qb, config.mode, config.w, config.z);
  const T scale = static_cast<T>(qa.compander * qb.compander);
  for (T& v : r.values()) v /= scale;
  return r;
}

std::uint64_t packed_mac_count(PackingMode mode, std::size_t tile_side, int w) {
  const std::size_t L = tile_side;
  const std::size_t reduced = L / static_cast<std::size_t>(w);
  return mode == PackingMode::kSymmetric ? gemm_mac_count(L, reduced, L) : gemm_mac_count(reduced, L, L);
}

std::size_t packed_storage_elements(PackingMode mode, std::size_t tile_side, int w) {
  const std::size_t L = tile_side;
  const std::size_t reduced = L / static_cast<std::size_t>(w);
  return mode == PackingMode::kSymmetric ? 2 * L * reduced : reduced * L + L * L;
}

#define TDGEMM_INSTANTIATE(T)                                                                               \
  template QuantizedTile<T> quantize_subblock(const Matrix<T>&, double);                                    \
  template std::pair<PackedTile<T>, PackedTile<T>> pack_symmetric(const QuantizedTile<T>&,                  \
                                                                  const QuantizedTile<T>&, int, double);    \
  template Matrix<T> multiply_packed_symmetric(const PackedTile<T>&, const PackedTile<T>&);                 \
  template Matrix<T> unpack_symmetric(const Matrix<T>&, double);                                            \
  template PackedTile<T> pack_asymmetric(const QuantizedTile<T>&, int, double);                             \
  template Matrix<T> multiply_packed_asymmetric(const PackedTile<T>&, const QuantizedTile<T>&);             \
  template Matrix<T> unpack_asymmetric(const Matrix<T>&, double, int);                                      \
  template Matrix<T> packed_integer_product(const QuantizedTile<T>&, const QuantizedTile<T>&, PackingMode, \
                                            int, double);                                                   \
  template Matrix<T> packed_subblock_product(const Matrix<T>&, const Matrix<T>&, const PackingConfig&);

TDGEMM_INSTANTIATE(float)
TDGEMM_INSTANTIATE(double)

}  // namespace tdgemm
