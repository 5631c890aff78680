#pragma once

#include <cstddef>
#include <vector>

#include "binplay/codes.hpp"
#include "binplay/rng.hpp"
#include "binplay/tensor.hpp"

namespace binplay::assign {

// Bijection between one batch's samples and its codebook. Positions are
// 0-based within the batch; code_of_sample[s] is the codebook entry that
// sample s was matched to, dist_sq[s] the squared distance at match time.
struct Assignment {
    std::vector<std::size_t> code_of_sample;
    std::vector<double> dist_sq;

    bool same_mapping(const Assignment& other) const {
        return code_of_sample == other.code_of_sample;
    }
    double total_loss() const {
        double sum = 0.0;
        for (double d : dist_sq) sum += d;
        return sum;
    }
};

// Index of the nearest available code by squared Euclidean distance; ties
// go to the lowest codebook index. available[j] == 0 marks taken codes.
std::size_t nearest_tiebreak(const double* z, std::size_t dim,
                             const std::vector<codes::BinaryCode>& codebook,
                             const std::vector<char>& available);

// Visits samples in `order`; each takes the nearest not-yet-taken code,
// which is then removed from the pool. Requires |latents| == |codebook|.
Assignment greedy_assign(const Tensor2& latents,
                         const std::vector<codes::BinaryCode>& codebook,
                         const std::vector<std::size_t>& order);

// Uniform permutation of 0..count-1 from the run's seeded generator.
std::vector<std::size_t> shuffle_order(std::size_t count, rng::Engine& rng);

// True iff the last k assignments in history are identical maps.
bool is_stable(const std::vector<Assignment>& history, std::size_t k);

}  // namespace binplay::assign
