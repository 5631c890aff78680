#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "binplay/error.hpp"

namespace binplay::rng {

// Component stream tags. A component's stream seed is master ^ tag, so
// adding or removing one component never perturbs another's sequence.
inline constexpr std::uint64_t kScenarioStream = 0x5ce7a210b5a6c001ULL;
inline constexpr std::uint64_t kEncoderInitStream = 0xe7c0de2111170002ULL;
inline constexpr std::uint64_t kDecoderInitStream = 0xdec0de2111170003ULL;
inline constexpr std::uint64_t kClassifierInitStream = 0xc1a5512111170004ULL;
inline constexpr std::uint64_t kAeTrainStream = 0xae72a1713a1e0005ULL;
inline constexpr std::uint64_t kClassifierTrainStream = 0xc172a1713a1e0006ULL;
inline constexpr std::uint64_t kSynthStream = 0x5d17a7a6e7e20007ULL;

inline constexpr std::uint64_t derive(std::uint64_t master, std::uint64_t tag) {
    return master ^ tag;
}

// Seeded generator with explicit draw helpers. std::shuffle and the
// std::*_distribution adaptors are implementation-defined, so every draw
// goes through these routines instead; goldens recorded from them hold on
// any conforming platform.
class Engine {
public:
    explicit Engine(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform draw from [0, n), unbiased via rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) fail("invalid-argument", "below(0) has no support");
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % n;
        std::uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return x % n;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Fisher-Yates, high index down.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    std::vector<std::size_t> permutation(std::size_t count) {
        std::vector<std::size_t> order(count);
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle(order);
        return order;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace binplay::rng
