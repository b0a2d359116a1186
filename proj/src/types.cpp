#include "aggen/types.hpp"

#include <cassert>
#include <cstdio>
#include <string>

namespace aggen {

namespace {

inline std::uint64_t rotl64(std::uint64_t x, int r) {
    return (x << r) | (x >> (64 - r));
}

inline std::uint64_t fmix64(std::uint64_t k) {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ULL;
    k ^= k >> 33;
    return k;
}

constexpr std::uint64_t kC1 = 0x87c37b91114253d5ULL;
constexpr std::uint64_t kC2 = 0x4cf5ad432745937fULL;
constexpr std::uint64_t kSeed = 0x414747454e2d3031ULL;

} // namespace

// MurmurHash3 x64 128 over the fact sequence encoded as little-endian u32
// words. The words are consumed directly (4 per 16-byte block) so the result
// does not depend on host endianness.
StateKey state_key_sorted(std::span<const FactId> sorted_facts) {
    assert(is_canonical(sorted_facts));

    std::uint64_t h1 = kSeed;
    std::uint64_t h2 = kSeed;

    const std::size_t n = sorted_facts.size();
    const std::size_t nblocks = n / 4;
    const FactId* f = sorted_facts.data();

    for (std::size_t i = 0; i < nblocks; ++i) {
        std::uint64_t k1 = static_cast<std::uint64_t>(f[i * 4]) |
                           (static_cast<std::uint64_t>(f[i * 4 + 1]) << 32);
        std::uint64_t k2 = static_cast<std::uint64_t>(f[i * 4 + 2]) |
                           (static_cast<std::uint64_t>(f[i * 4 + 3]) << 32);

        k1 *= kC1; k1 = rotl64(k1, 31); k1 *= kC2; h1 ^= k1;
        h1 = rotl64(h1, 27); h1 += h2; h1 = h1 * 5 + 0x52dce729;
        k2 *= kC2; k2 = rotl64(k2, 33); k2 *= kC1; h2 ^= k2;
        h2 = rotl64(h2, 31); h2 += h1; h2 = h2 * 5 + 0x38495ab5;
    }

    std::uint64_t k1 = 0;
    std::uint64_t k2 = 0;
    switch (n & 3) {
    case 3:
        k2 = static_cast<std::uint64_t>(f[nblocks * 4 + 2]);
        [[fallthrough]];
    case 2:
        k1 |= static_cast<std::uint64_t>(f[nblocks * 4 + 1]) << 32;
        [[fallthrough]];
    case 1:
        k1 |= static_cast<std::uint64_t>(f[nblocks * 4]);
        break;
    default:
        break;
    }
    if (k2 != 0 || (n & 3) == 3) {
        k2 *= kC2; k2 = rotl64(k2, 33); k2 *= kC1; h2 ^= k2;
    }
    if (k1 != 0 || (n & 3) >= 1) {
        k1 *= kC1; k1 = rotl64(k1, 31); k1 *= kC2; h1 ^= k1;
    }

    const std::uint64_t len = static_cast<std::uint64_t>(n) * 4;
    h1 ^= len;
    h2 ^= len;
    h1 += h2;
    h2 += h1;
    h1 = fmix64(h1);
    h2 = fmix64(h2);
    h1 += h2;
    h2 += h1;

    return StateKey{h1, h2};
}

StateKey canonical_state_key(std::span<const FactId> facts) {
    if (is_canonical(facts)) {
        return state_key_sorted(facts);
    }
    FactSet canon = make_fact_set(FactSet(facts.begin(), facts.end()));
    return state_key_sorted(canon);
}

std::string to_hex(const StateKey& k) {
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                  static_cast<unsigned long long>(k.hi),
                  static_cast<unsigned long long>(k.lo));
    return std::string(buf);
}

} // namespace aggen
