// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tdgemm/matrix.hpp"

namespace tdgemm {

// Per-tile statistics gathered while reordering. sigma is the sample
// standard deviation about the tile mean, accumulated in double.
struct TileStats {
  double min = 0;
  double max = 0;
  double mean = 0;
  double sigma = 0;

  double max_abs() const;
};

template <Real T>
TileStats compute_tile_stats(std::span<const T> values);

// Grid traversal order of the stored tiles. Row-wise places tile (r, c) at
// r * grid_cols + c; column-wise at c * grid_rows + r, so the tiles of one
// grid column (the B operands of one inner kernel) are adjacent. Elements
// inside a tile are always row-major.
enum class RasterOrder { kRowwise, kColumnwise };

// Matrix reordered into L x L tiles covering the largest multiple-of-L
// region; rows and columns beyond it are border residue.
template <Real T>
class BlockMajorMatrix {
 public:
  BlockMajorMatrix(std::size_t tile_side, std::size_t grid_rows, std::size_t grid_cols, RasterOrder order,
                   std::vector<Matrix<T>> tiles, std::vector<TileStats> stats);

  std::size_t tile_side() const noexcept { return tile_side_; }
  std::size_t grid_rows() const noexcept { return grid_rows_; }
  std::size_t grid_cols() const noexcept { return grid_cols_; }
  RasterOrder order() const noexcept { return order_; }

  const Matrix<T>& tile(std::size_t r, std::size_t c) const { return tiles_[index(r, c)]; }
  const TileStats& stats(std::size_t r, std::size_t c) const { return stats_[index(r, c)]; }

  // Tiles in storage order.
  std::span<const Matrix<T>> tiles() const noexcept { return tiles_; }

 private:
  std::size_t index(std::size_t r, std::size_t c) const;

  std::size_t tile_side_;
  std::size_t grid_rows_;
  std::size_t grid_cols_;
  RasterOrder order_;
  std::vector<Matrix<T>> tiles_;
  std::vector<TileStats> stats_;
};

template <Real T>
BlockMajorMatrix<T> reorder_block_major(const Matrix<T>& m, std::size_t tile_side, RasterOrder order);

// Rebuilds the covered (grid_rows*L) x (grid_cols*L) region.
template <Real T>
Matrix<T> inverse_reorder(const BlockMajorMatrix<T>& bm);

// r = a * b with every output accumulated over the inner index in ascending
// order, starting from zero. The result is bitwise reproducible.
template <Real T>
Matrix<T> plain_subblock_gemm(const Matrix<T>& a, const Matrix<T>& b);

// Same as above, writing into out (resized as needed).
template <Real T>
void plain_subblock_gemm(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out);

// Multiply-accumulates performed by plain_subblock_gemm for these shapes.
std::uint64_t gemm_mac_count(std::size_t rows, std::size_t inner, std::size_t cols);

}  // namespace tdgemm
