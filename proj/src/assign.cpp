#include "binplay/assign.hpp"

#include <cstdint>
#include <limits>

namespace binplay::assign {

namespace {

double dist_sq(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

std::size_t nearest_tiebreak(const double* z, std::size_t dim,
                             const std::vector<codes::BinaryCode>& codebook,
                             const std::vector<char>& available) {
    if (codebook.size() != available.size())
        fail("size-mismatch", "availability mask does not match codebook");
    for (const auto& code : codebook)
        if (code.size() != dim)
            fail("dimension-mismatch", "latent dim " + std::to_string(dim) +
                                           " vs code length " +
                                           std::to_string(code.size()));

    std::vector<double> dists(codebook.size(),
                              std::numeric_limits<double>::infinity());
    const std::int64_t n = static_cast<std::int64_t>(codebook.size());
#pragma omp parallel for schedule(static) if (codebook.size() * dim > (1u << 14))
    for (std::int64_t j = 0; j < n; ++j) {
        if (!available[static_cast<std::size_t>(j)]) continue;
        dists[static_cast<std::size_t>(j)] =
            dist_sq(z, codebook[static_cast<std::size_t>(j)].data(), dim);
    }

    // Serial scan keeps the lowest-index tie rule exact.
    std::size_t best = codebook.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < codebook.size(); ++j) {
        if (available[j] && dists[j] < best_dist) {
            best = j;
            best_dist = dists[j];
        }
    }
    if (best == codebook.size()) fail("empty-pool", "no available code");
    return best;
}

Assignment greedy_assign(const Tensor2& latents,
                         const std::vector<codes::BinaryCode>& codebook,
                         const std::vector<std::size_t>& order) {
    const std::size_t count = latents.rows;
    if (count != codebook.size())
        fail("size-mismatch", std::to_string(count) + " latents vs " +
                                  std::to_string(codebook.size()) + " codes");
    if (order.size() != count)
        fail("invalid-order", "order length " + std::to_string(order.size()));
    std::vector<char> seen(count, 0);
    for (std::size_t s : order) {
        if (s >= count || seen[s])
            fail("invalid-order", "order is not a permutation of sample positions");
        seen[s] = 1;
    }

    Assignment result;
    result.code_of_sample.assign(count, 0);
    result.dist_sq.assign(count, 0.0);
    std::vector<char> available(count, 1);
    for (std::size_t s : order) {
        const std::size_t j =
            nearest_tiebreak(latents.row(s), latents.cols, codebook, available);
        result.code_of_sample[s] = j;
        result.dist_sq[s] = dist_sq(latents.row(s), codebook[j].data(), latents.cols);
        available[j] = 0;
    }
    return result;
}

std::vector<std::size_t> shuffle_order(std::size_t count, rng::Engine& rng) {
    return rng.permutation(count);
}

bool is_stable(const std::vector<Assignment>& history, std::size_t k) {
    if (k == 0 || history.size() < k) return false;
    const Assignment& last = history.back();
    for (std::size_t i = history.size() - k; i < history.size(); ++i)
        if (!history[i].same_mapping(last)) return false;
    return true;
}

}  // namespace binplay::assign
