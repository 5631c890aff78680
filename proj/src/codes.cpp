#include "binplay/codes.hpp"

#include <algorithm>
#include <set>

#include "binplay/error.hpp"

namespace binplay::codes {

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t mod) {
    return static_cast<std::uint64_t>(
        static_cast<unsigned __int128>(a) * b % mod);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
    std::uint64_t result = 1;
    base %= mod;
    while (exp > 0) {
        if (exp & 1) result = mulmod(result, base, mod);
        base = mulmod(base, base, mod);
        exp >>= 1;
    }
    return result;
}

}  // namespace

// Deterministic Miller-Rabin for 64-bit inputs.
bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL,
                            19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n == q) return true;
        if (n % q == 0) return false;
    }
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL,
                            19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int k = 0; k < r - 1; ++k) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

void SubvectorSpec::validate() const {
    if (m < 1 || m > 63)
        fail("invalid-spec", "bit width m=" + std::to_string(m) + " outside 1..63");
    if (p == 2 || !is_prime(p))
        fail("invalid-spec", "p=" + std::to_string(p) + " is not an odd prime");
}

void CodeLayout::validate() const {
    if (index_subvectors.empty())
        fail("invalid-spec", "layout has no index subvectors");
    std::set<std::uint64_t> primes;
    for (const auto& s : index_subvectors) {
        s.validate();
        if (!primes.insert(s.p).second)
            fail("invalid-spec", "duplicate index subvector prime " + std::to_string(s.p));
    }
    prefix.validate();
}

int CodeLayout::code_length() const {
    int n = prefix.m;
    for (const auto& s : index_subvectors) n += s.m;
    return n;
}

std::uint64_t CodeLayout::capacity() const {
    int min_m = 64;
    for (const auto& s : index_subvectors) min_m = std::min(min_m, s.m);
    if (min_m == 64) return 0;
    return std::uint64_t{1} << min_m;
}

std::uint64_t CodeLayout::batch_capacity() const {
    return std::uint64_t{1} << prefix.m;
}

CodeLayout CodeLayout::default_layout() {
    CodeLayout layout;
    layout.index_subvectors = {{16, 3}, {16, 5}, {16, 7}, {16, 11}};
    layout.prefix = {8, 3};
    return layout;
}

int exponent(int m, std::uint64_t p) {
    if (m < 1 || m > 63)
        fail("invalid-spec", "bit width m=" + std::to_string(m) + " outside 1..63");
    if (p == 2 || !is_prime(p))
        fail("invalid-spec", "p=" + std::to_string(p) + " is not an odd prime");
    const std::uint64_t limit = std::uint64_t{1} << m;
    int e = 0;
    std::uint64_t power = 1;
    // power * p < limit without overflow: power never exceeds 2^63 / p.
    while (power <= (limit - 1) / p) {
        power *= p;
        ++e;
    }
    return e;
}

std::uint64_t odd_multiplier(int m, std::uint64_t p) {
    int e = exponent(m, p);
    std::uint64_t power = 1;
    for (int k = 0; k < e; ++k) power *= p;
    return power;
}

std::uint64_t subvector_code(std::uint64_t i, const SubvectorSpec& spec) {
    spec.validate();
    const std::uint64_t cap = std::uint64_t{1} << spec.m;
    if (i < 1 || i > cap)
        fail("index-out-of-capacity",
             "i=" + std::to_string(i) + " outside 1..2^" + std::to_string(spec.m));
    const std::uint64_t mask = cap - 1;
    // Unsigned multiply wraps mod 2^64; masking afterwards is exact mod 2^m.
    return (i * odd_multiplier(spec.m, spec.p)) & mask;
}

namespace {

void append_bits(std::uint64_t word, int m, std::vector<std::uint8_t>& out) {
    for (int bit = m - 1; bit >= 0; --bit)
        out.push_back(static_cast<std::uint8_t>((word >> bit) & 1));
}

}  // namespace

std::vector<std::uint8_t> index_code(std::uint64_t i, const CodeLayout& layout) {
    std::vector<std::uint8_t> bits;
    for (const auto& spec : layout.index_subvectors)
        append_bits(subvector_code(i, spec), spec.m, bits);
    return bits;
}

BinaryCode full_code(std::uint64_t batch, std::uint64_t i, const CodeLayout& layout) {
    layout.validate();
    if (batch < 1 || batch > layout.batch_capacity())
        fail("batch-out-of-capacity",
             "batch=" + std::to_string(batch) + " outside 1..2^" +
                 std::to_string(layout.prefix.m));
    if (i < 1 || i > layout.capacity())
        fail("index-out-of-capacity",
             "i=" + std::to_string(i) + " exceeds layout capacity " +
                 std::to_string(layout.capacity()));

    std::vector<std::uint8_t> bits;
    append_bits(subvector_code(batch, layout.prefix), layout.prefix.m, bits);
    for (std::uint8_t b : index_code(i, layout)) bits.push_back(b);

    BinaryCode code(bits.size());
    for (std::size_t k = 0; k < bits.size(); ++k)
        code[k] = 2.0 * static_cast<double>(bits[k]) - 1.0;
    return code;
}

std::vector<BinaryCode> codebook(std::uint64_t batch, std::uint64_t first,
                                 std::uint64_t last, const CodeLayout& layout) {
    if (first < 1 || first > last)
        fail("index-out-of-capacity",
             "bad index range " + std::to_string(first) + ".." + std::to_string(last));
    std::vector<BinaryCode> codes;
    codes.reserve(static_cast<std::size_t>(last - first + 1));
    for (std::uint64_t i = first; i <= last; ++i)
        codes.push_back(full_code(batch, i, layout));
    return codes;
}

std::string to_string(const BinaryCode& code) {
    std::string s;
    s.reserve(code.size());
    for (double v : code) s.push_back(v > 0.0 ? '+' : '-');
    return s;
}

}  // namespace binplay::codes
