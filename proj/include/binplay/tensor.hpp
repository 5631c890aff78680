#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "binplay/error.hpp"

namespace binplay {

// Row-major dense matrix of doubles.
struct Tensor2 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor2() = default;
    Tensor2(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    std::size_t size() const { return data.size(); }

    bool same_shape(const Tensor2& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

inline void require_shape(const Tensor2& a, const Tensor2& b, const char* where) {
    if (!a.same_shape(b))
        fail("shape-mismatch", std::string(where) + ": " + std::to_string(a.rows) + "x" +
                                   std::to_string(a.cols) + " vs " + std::to_string(b.rows) +
                                   "x" + std::to_string(b.cols));
}

inline bool all_finite(const Tensor2& t) {
    for (double v : t.data)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace binplay
