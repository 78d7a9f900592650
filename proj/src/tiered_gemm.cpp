// SPDX-License-Identifier: Apache-2.0
#include "tdgemm/tiered_gemm.hpp"

#include <algorithm>

#include "tdgemm/block_major.hpp"
#include "tdgemm/error.hpp"
#include "tdgemm/packing.hpp"

namespace tdgemm {

namespace {

// out(r, c) += sum over k in [k0, k1) of a(r, k) b(k, c), one k at a time.
template <Real T>
void accumulate(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out, std::size_t r0, std::size_t r1,
                std::size_t c0, std::size_t c1, std::size_t k0, std::size_t k1) {
  for (std::size_t r = r0; r < r1; ++r) {
    T* orow = out.row(r);
    const T* arow = a.row(r);
    for (std::size_t k = k0; k < k1; ++k) {
      const T av = arow[k];
      const T* brow = b.row(k);
      for (std::size_t c = c0; c < c1; ++c) orow[c] += av * brow[c];
    }
  }
}

}  // namespace

template <Real T>
Matrix<T> tiered_gemm(const Matrix<T>& a, const Matrix<T>& b, std::size_t L, const KernelPlan* plan,
                      GemmCounters* counters) {
  if (a.cols() != b.rows()) throw DimensionError("inner dimensions differ");
  if (L == 0) throw InvalidConfigError("tile side must be positive");
  const std::size_t M = a.rows(), K = a.cols(), N = b.cols();
  const std::size_t gr = M / L, gk = K / L, gc = N / L;
  if (plan != nullptr && (plan->tile_side != L || plan->kernel_rows != gr || plan->kernel_cols != gc ||
                          plan->inner != gk || plan->kernels.size() != gr * gc))
    throw DimensionError("plan shape does not match the tiling");

  Matrix<T> out(M, N);
  std::uint64_t macs = 0;
  if (gr > 0 && gk > 0 && gc > 0) {
    const auto abm = reorder_block_major(a, L, RasterOrder::kRowwise);
    const auto bbm = reorder_block_major(b, L, RasterOrder::kColumnwise);
    Matrix<T> product(L, L);
    for (std::size_t i = 0; i < gr; ++i) {
      for (std::size_t j = 0; j < gc; ++j) {
        const KernelPlanEntry* entry = plan != nullptr ? &plan->at(i, j) : nullptr;
        if (entry != nullptr && entry->chosen.size() != gk) throw DimensionError("plan entry has the wrong subblock count");
        Matrix<T> acc(L, L);
        for (std::size_t l = 0; l < gk; ++l) {
          const SubblockOption* opt = entry != nullptr ? &entry->chosen[l] : nullptr;
          if (opt == nullptr || opt->w == 1) {
            plain_subblock_gemm(abm.tile(i, l), bbm.tile(l, j), product);
            macs += gemm_mac_count(L, L, L);
          } else {
            const auto config = PackingConfig::make(plan->mode, opt->w, opt->c_a, opt->c_b, opt->rmax, plan->u_safe);
            product = packed_subblock_product(abm.tile(i, l), bbm.tile(l, j), config);
            macs += packed_mac_count(plan->mode, L, opt->w);
          }
          auto dst = acc.values();
          auto src = product.values();
          for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += src[e];
        }
        for (std::size_t r = 0; r < L; ++r) {
          const T* src = acc.row(r);
          std::copy(src, src + L, out.row(i * L + r) + j * L);
        }
      }
    }
  }
  const std::size_t mf = gr * L, kf = gk * L, nf = gc * L;
  if (gk > 0) {
    accumulate(a, b, out, 0, mf, 0, nf, kf, K);
  } else {
    accumulate(a, b, out, 0, mf, 0, nf, 0, K);
  }
  accumulate(a, b, out, 0, mf, nf, N, 0, K);
  accumulate(a, b, out, mf, M, 0, N, 0, K);
  macs += gemm_mac_count(M, K, N) - gemm_mac_count(mf, kf, nf);

  if (counters != nullptr) {
    counters->macs = macs;
    counters->plain_macs = gemm_mac_count(M, K, N);
  }
  return out;
}

template Matrix<float> tiered_gemm(const Matrix<float>&, const Matrix<float>&, std::size_t, const KernelPlan*,
                                   GemmCounters*);
template Matrix<double> tiered_gemm(const Matrix<double>&, const Matrix<double>&, std::size_t, const KernelPlan*,
                                    GemmCounters*);

}  // namespace tdgemm
