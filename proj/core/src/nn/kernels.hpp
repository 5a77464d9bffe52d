#pragma once

#include <cstddef>

// Dense kernels shared by the conv and fully-connected layers.
//
// Every output element is accumulated over the inner dimension in
// ascending order, independent of how many columns are processed at once.
// That is what makes a batched forward pass bit-identical to a loop of
// single-sample passes.
namespace s2p::nn::kernels {

/// C(m x n) = A(m x k) * B(k x n), or C += A*B when `accumulate`.
/// All matrices row-major and contiguous.
void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
          bool accumulate);

/// out(cols x rows) = transpose of in(rows x cols).
void transpose(std::size_t rows, std::size_t cols, const double* in, double* out);

}  // namespace s2p::nn::kernels
