#pragma once

#include <vector>

#include "binplay/tensor.hpp"

namespace binplay::kernels {

// Dense kernels behind the network code. Each output element is owned by
// exactly one loop iteration and accumulated in a fixed operand order, so
// results are bit-identical for any thread count. The serial:: variants
// are the reference implementations the tests and the benchmark compare
// against.

// C[i][j] = sum_t A[i][t] * B[j][t]        (A: a x k, B: b x k -> a x b)
Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b);

// C[i][j] = sum_t A[i][t] * B[t][j]        (A: a x k, B: k x b -> a x b)
Tensor2 matmul_nn(const Tensor2& a, const Tensor2& b);

// C[i][j] = sum_s A[s][i] * B[s][j]        (A: k x a, B: k x b -> a x b)
Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b);

// out[j] = sum_r A[r][j], rows in ascending order.
std::vector<double> col_sums(const Tensor2& a);

namespace serial {

Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b);
Tensor2 matmul_nn(const Tensor2& a, const Tensor2& b);
Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b);
std::vector<double> col_sums(const Tensor2& a);

}  // namespace serial

}  // namespace binplay::kernels
