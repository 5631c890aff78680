#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace binplay::codes {

// One segment of a binary code: the index (or batch number) is multiplied
// by the largest power of an odd prime below 2^m and the m least
// significant bits of the product form the segment. The multiplier is odd,
// hence coprime with 2^m, which makes the map injective over 1..2^m.
struct SubvectorSpec {
    int m = 0;            // bit width, 1..63
    std::uint64_t p = 0;  // odd prime

    void validate() const;
};

using BinaryCode = std::vector<double>;  // entries exactly -1.0 or +1.0

struct CodeLayout {
    std::vector<SubvectorSpec> index_subvectors;  // pairwise distinct primes
    SubvectorSpec prefix;                         // encodes the batch number

    void validate() const;
    int code_length() const;             // prefix m + sum of index m
    std::uint64_t capacity() const;      // 2^(min m over index subvectors)
    std::uint64_t batch_capacity() const;

    // Four index subvectors of m=16 with primes 3,5,7,11 plus an m=8, p=3
    // batch prefix: 72 bits total, capacity 65536 indices per batch.
    static CodeLayout default_layout();
};

bool is_prime(std::uint64_t n);

// Largest e with p^e < 2^m, by pure integer arithmetic. Equal to
// floor(m ln2 / ln p) for odd prime p because p^e can never hit 2^m.
int exponent(int m, std::uint64_t p);

// p^exponent(m, p); odd, and 2^m/p < multiplier < 2^m.
std::uint64_t odd_multiplier(int m, std::uint64_t p);

// (i * p^e) mod 2^m for 1 <= i <= 2^m.
std::uint64_t subvector_code(std::uint64_t i, const SubvectorSpec& spec);

// Concatenated subvector bits (0/1, most significant bit first per
// subvector) for an index over all index subvectors in layout order.
std::vector<std::uint8_t> index_code(std::uint64_t i, const CodeLayout& layout);

// Batch prefix followed by the index code, each bit b mapped to 2b-1.
BinaryCode full_code(std::uint64_t batch, std::uint64_t i, const CodeLayout& layout);

// Codes for indices first..last inclusive, in index order.
std::vector<BinaryCode> codebook(std::uint64_t batch, std::uint64_t first,
                                 std::uint64_t last, const CodeLayout& layout);

// "+"/"-" rendering, one character per bit.
std::string to_string(const BinaryCode& code);

}  // namespace binplay::codes
