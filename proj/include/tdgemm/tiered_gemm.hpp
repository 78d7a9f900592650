// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>

#include "tdgemm/config.hpp"
#include "tdgemm/controller.hpp"
#include "tdgemm/matrix.hpp"

namespace tdgemm {

struct GemmCounters {
  std::uint64_t macs = 0;        // multiply-accumulates actually issued
  std::uint64_t plain_macs = 0;  // M K N

  double mac_ratio() const { return macs == 0 ? 1.0 : static_cast<double>(plain_macs) / static_cast<double>(macs); }
};

// C = A B over L x L tiles. Each inner kernel sums its subblock products
// in ascending l, each product computed per the plan (plain when plan is
// null or W = 1). The K residue and the border rows and columns outside
// full tiles are accumulated plainly in ascending k.
template <Real T>
Matrix<T> tiered_gemm(const Matrix<T>& a, const Matrix<T>& b, std::size_t tile_side, const KernelPlan* plan = nullptr,
                      GemmCounters* counters = nullptr);

}  // namespace tdgemm
