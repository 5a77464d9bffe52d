#include "kernels.hpp"

#include <algorithm>

namespace s2p::nn::kernels {

namespace {

constexpr std::size_t kColBlock = 512;

}  // namespace

void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
          bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  if (k == 0) return;

  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = a + (i + 0) * k;
    const double* a1 = a + (i + 1) * k;
    const double* a2 = a + (i + 2) * k;
    const double* a3 = a + (i + 3) * k;
    for (std::size_t j0 = 0; j0 < n; j0 += kColBlock) {
      const std::size_t j1 = std::min(n, j0 + kColBlock);
      double* __restrict c0 = c + (i + 0) * n;
      double* __restrict c1 = c + (i + 1) * n;
      double* __restrict c2 = c + (i + 2) * n;
      double* __restrict c3 = c + (i + 3) * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double* __restrict brow = b + p * n;
        const double v0 = a0[p], v1 = a1[p], v2 = a2[p], v3 = a3[p];
        for (std::size_t j = j0; j < j1; ++j) {
          const double bv = brow[j];
          c0[j] += v0 * bv;
          c1[j] += v1 * bv;
          c2[j] += v2 * bv;
          c3[j] += v3 * bv;
        }
      }
    }
  }
  for (; i < m; ++i) {
    const double* arow = a + i * k;
    double* __restrict crow = c + i * n;
    for (std::size_t j0 = 0; j0 < n; j0 += kColBlock) {
      const std::size_t j1 = std::min(n, j0 + kColBlock);
      for (std::size_t p = 0; p < k; ++p) {
        const double* __restrict brow = b + p * n;
        const double v = arow[p];
        for (std::size_t j = j0; j < j1; ++j) crow[j] += v * brow[j];
      }
    }
  }
}

void transpose(std::size_t rows, std::size_t cols, const double* in, double* out) {
  constexpr std::size_t kTile = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += kTile) {
    const std::size_t r1 = std::min(rows, r0 + kTile);
    for (std::size_t c0 = 0; c0 < cols; c0 += kTile) {
      const std::size_t c1 = std::min(cols, c0 + kTile);
      for (std::size_t r = r0; r < r1; ++r)
        for (std::size_t cc = c0; cc < c1; ++cc) out[cc * rows + r] = in[r * cols + cc];
    }
  }
}

}  // namespace s2p::nn::kernels
