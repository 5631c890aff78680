#include "binplay/kernels.hpp"

#include <cstdint>

namespace binplay::kernels {

namespace {

void check_nt(const Tensor2& a, const Tensor2& b) {
    if (a.cols != b.cols)
        fail("shape-mismatch", "matmul_nt inner dims " + std::to_string(a.cols) + " vs " +
                                   std::to_string(b.cols));
}

void check_nn(const Tensor2& a, const Tensor2& b) {
    if (a.cols != b.rows)
        fail("shape-mismatch", "matmul_nn inner dims " + std::to_string(a.cols) + " vs " +
                                   std::to_string(b.rows));
}

void check_tn(const Tensor2& a, const Tensor2& b) {
    if (a.rows != b.rows)
        fail("shape-mismatch", "matmul_tn inner dims " + std::to_string(a.rows) + " vs " +
                                   std::to_string(b.rows));
}

// Parallelizing tiny products costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 14;

}  // namespace

Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b) {
    check_nt(a, b);
    Tensor2 c(a.rows, b.rows);
    const std::int64_t n = static_cast<std::int64_t>(a.rows);
    const std::size_t work = a.rows * b.rows * a.cols;
#pragma omp parallel for schedule(static) if (work > kParallelWork)
    for (std::int64_t i = 0; i < n; ++i) {
        const double* ai = a.row(static_cast<std::size_t>(i));
        double* ci = c.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* bj = b.row(j);
            double acc = 0.0;
            for (std::size_t t = 0; t < a.cols; ++t) acc += ai[t] * bj[t];
            ci[j] = acc;
        }
    }
    return c;
}

Tensor2 matmul_nn(const Tensor2& a, const Tensor2& b) {
    check_nn(a, b);
    Tensor2 c(a.rows, b.cols);
    const std::int64_t n = static_cast<std::int64_t>(a.rows);
    const std::size_t work = a.rows * b.cols * a.cols;
#pragma omp parallel for schedule(static) if (work > kParallelWork)
    for (std::int64_t i = 0; i < n; ++i) {
        const double* ai = a.row(static_cast<std::size_t>(i));
        double* ci = c.row(static_cast<std::size_t>(i));
        for (std::size_t t = 0; t < a.cols; ++t) {
            const double ait = ai[t];
            const double* bt = b.row(t);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += ait * bt[j];
        }
    }
    return c;
}

Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b) {
    check_tn(a, b);
    Tensor2 c(a.cols, b.cols);
    const std::int64_t n = static_cast<std::int64_t>(a.cols);
    const std::size_t work = a.cols * b.cols * a.rows;
#pragma omp parallel for schedule(static) if (work > kParallelWork)
    for (std::int64_t i = 0; i < n; ++i) {
        double* ci = c.row(static_cast<std::size_t>(i));
        for (std::size_t s = 0; s < a.rows; ++s) {
            const double asi = a.at(s, static_cast<std::size_t>(i));
            const double* bs = b.row(s);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += asi * bs[j];
        }
    }
    return c;
}

std::vector<double> col_sums(const Tensor2& a) {
    std::vector<double> sums(a.cols, 0.0);
    const std::int64_t n = static_cast<std::int64_t>(a.cols);
#pragma omp parallel for schedule(static) if (a.size() > kParallelWork)
    for (std::int64_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t r = 0; r < a.rows; ++r)
            acc += a.at(r, static_cast<std::size_t>(j));
        sums[static_cast<std::size_t>(j)] = acc;
    }
    return sums;
}

namespace serial {

Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b) {
    check_nt(a, b);
    Tensor2 c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* bj = b.row(j);
            double acc = 0.0;
            for (std::size_t t = 0; t < a.cols; ++t) acc += ai[t] * bj[t];
            ci[j] = acc;
        }
    }
    return c;
}

Tensor2 matmul_nn(const Tensor2& a, const Tensor2& b) {
    check_nn(a, b);
    Tensor2 c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t t = 0; t < a.cols; ++t) {
            const double ait = ai[t];
            const double* bt = b.row(t);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += ait * bt[j];
        }
    }
    return c;
}

Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b) {
    check_tn(a, b);
    Tensor2 c(a.cols, b.cols);
    for (std::size_t i = 0; i < a.cols; ++i) {
        double* ci = c.row(i);
        for (std::size_t s = 0; s < a.rows; ++s) {
            const double asi = a.at(s, i);
            const double* bs = b.row(s);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += asi * bs[j];
        }
    }
    return c;
}

std::vector<double> col_sums(const Tensor2& a) {
    std::vector<double> sums(a.cols, 0.0);
    for (std::size_t j = 0; j < a.cols; ++j) {
        double acc = 0.0;
        for (std::size_t r = 0; r < a.rows; ++r) acc += a.at(r, j);
        sums[j] = acc;
    }
    return sums;
}

}  // namespace serial

}  // namespace binplay::kernels
