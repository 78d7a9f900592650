// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstring>

#include "tdgemm/block_major.hpp"

namespace tdgemm {

template <Real T>
bool bitwise_equal(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return a.empty() || std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(T)) == 0;
}

double TileStats::max_abs() const { return std::max(std::fabs(min), std::fabs(max)); }

template <Real T>
TileStats compute_tile_stats(std::span<const T> values) {
  TileStats s;
  if (values.empty()) return s;
  double lo = values[0];
  double hi = values[0];
  double sum = 0;
  for (T v : values) {
    lo = std::min<double>(lo, v);
    hi = std::max<double>(hi, v);
    sum += v;
  }
  const double n = static_cast<double>(values.size());
  const double mean = sum / n;
  double ss = 0;
  for (T v : values) {
    const double d = static_cast<double>(v) - mean;
    ss += d * d;
  }
  s.min = lo;
  s.max = hi;
  s.mean = mean;
  s.sigma = values.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return s;
}

template <Real T>
BlockMajorMatrix<T>::BlockMajorMatrix(std::size_t tile_side, std::size_t grid_rows, std::size_t grid_cols,
                                      RasterOrder order, std::vector<Matrix<T>> tiles,
                                      std::vector<TileStats> stats)
    : tile_side_(tile_side),
      grid_rows_(grid_rows),
      grid_cols_(grid_cols),
      order_(order),
      tiles_(std::move(tiles)),
      stats_(std::move(stats)) {
  if (tiles_.size() != grid_rows_ * grid_cols_ || stats_.size() != tiles_.size())
    throw DimensionError("tile count does not match the grid");
}

template <Real T>
std::size_t BlockMajorMatrix<T>::index(std::size_t r, std::size_t c) const {
  if (r >= grid_rows_ || c >= grid_cols_) throw DimensionError("tile index outside the grid");
  return order_ == RasterOrder::kRowwise ? r * grid_cols_ + c : c * grid_rows_ + r;
}

template <Real T>
BlockMajorMatrix<T> reorder_block_major(const Matrix<T>& m, std::size_t tile_side, RasterOrder order) {
  if (m.empty()) throw DimensionError("cannot reorder an empty matrix");
  if (tile_side == 0) throw InvalidConfigError("tile side must be at least 1");
  const std::size_t L = tile_side;
  const std::size_t gr = m.rows() / L;
  const std::size_t gc = m.cols() / L;
  std::vector<Matrix<T>> tiles(gr * gc);
  std::vector<TileStats> stats(gr * gc);
  for (std::size_t r = 0; r < gr; ++r) {
    for (std::size_t c = 0; c < gc; ++c) {
      const std::size_t idx = order == RasterOrder::kRowwise ? r * gc + c : c * gr + r;
      Matrix<T> t(L, L);
      for (std::size_t i = 0; i < L; ++i) std::copy_n(m.row(r * L + i) + c * L, L, t.row(i));
      stats[idx] = compute_tile_stats<T>(t.values());
      tiles[idx] = std::move(t);
    }
  }
  return BlockMajorMatrix<T>(L, gr, gc, order, std::move(tiles), std::move(stats));
}

template <Real T>
Matrix<T> inverse_reorder(const BlockMajorMatrix<T>& bm) {
  const std::size_t L = bm.tile_side();
  Matrix<T> out(bm.grid_rows() * L, bm.grid_cols() * L);
  for (std::size_t r = 0; r < bm.grid_rows(); ++r)
    for (std::size_t c = 0; c < bm.grid_cols(); ++c) {
      const Matrix<T>& t = bm.tile(r, c);
      for (std::size_t i = 0; i < L; ++i) std::copy_n(t.row(i), L, out.row(r * L + i) + c * L);
    }
  return out;
}

template <Real T>
void plain_subblock_gemm(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out) {
  if (a.cols() != b.rows()) throw DimensionError("subblock operands are not conformable");
  const std::size_t m = a.rows();
  const std::size_t k = a.cols();
  const std::size_t n = b.cols();
  if (out.rows() != m || out.cols() != n) {
    out = Matrix<T>(m, n);
  } else {
    std::fill(out.values().begin(), out.values().end(), T{0});
  }

  // Four output rows share each streamed row of b. Every output element is
  // still accumulated over p = 0, 1, ..., k-1 in order.
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    T* __restrict c0 = out.row(i);
    T* __restrict c1 = out.row(i + 1);
    T* __restrict c2 = out.row(i + 2);
    T* __restrict c3 = out.row(i + 3);
    const T* a0 = a.row(i);
    const T* a1 = a.row(i + 1);
    const T* a2 = a.row(i + 2);
    const T* a3 = a.row(i + 3);
    for (std::size_t p = 0; p < k; ++p) {
      const T* __restrict bp = b.row(p);
      const T x0 = a0[p], x1 = a1[p], x2 = a2[p], x3 = a3[p];
      for (std::size_t j = 0; j < n; ++j) {
        const T bv = bp[j];
        c0[j] += x0 * bv;
        c1[j] += x1 * bv;
        c2[j] += x2 * bv;
        c3[j] += x3 * bv;
      }
    }
  }
  for (; i < m; ++i) {
    T* __restrict c0 = out.row(i);
    const T* a0 = a.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const T* __restrict bp = b.row(p);
      const T x0 = a0[p];
      for (std::size_t j = 0; j < n; ++j) c0[j] += x0 * bp[j];
    }
  }
}

template <Real T>
Matrix<T> plain_subblock_gemm(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> out;
  plain_subblock_gemm(a, b, out);
  return out;
}

std::uint64_t gemm_mac_count(std::size_t rows, std::size_t inner, std::size_t cols) {
  return static_cast<std::uint64_t>(rows) * inner * cols;
}

#define TDGEMM_INSTANTIATE(T)                                                                       \
  template bool bitwise_equal(const Matrix<T>&, const Matrix<T>&);                                  \
  template TileStats compute_tile_stats<T>(std::span<const T>);                                     \
  template class BlockMajorMatrix<T>;                                                               \
  template BlockMajorMatrix<T> reorder_block_major(const Matrix<T>&, std::size_t, RasterOrder);     \
  template Matrix<T> inverse_reorder(const BlockMajorMatrix<T>&);                                   \
  template void plain_subblock_gemm(const Matrix<T>&, const Matrix<T>&, Matrix<T>&);                \
  template Matrix<T> plain_subblock_gemm(const Matrix<T>&, const Matrix<T>&);

TDGEMM_INSTANTIATE(float)
TDGEMM_INSTANTIATE(double)

}  // namespace tdgemm
