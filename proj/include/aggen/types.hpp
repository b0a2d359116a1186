#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace aggen {

using FactId = std::uint32_t;
using ExploitId = std::uint32_t;

// Canonical fact-set representation: strictly ascending FactIds.
using FactSet = std::vector<FactId>;

// Sorts and deduplicates into canonical form.
inline FactSet make_fact_set(std::vector<FactId> facts) {
    std::sort(facts.begin(), facts.end());
    facts.erase(std::unique(facts.begin(), facts.end()), facts.end());
    return facts;
}

inline bool is_canonical(std::span<const FactId> facts) {
    return std::is_sorted(facts.begin(), facts.end()) &&
           std::adjacent_find(facts.begin(), facts.end()) == facts.end();
}

// subset ⊆ facts; both canonical.
inline bool is_subset(std::span<const FactId> subset, std::span<const FactId> facts) {
    return std::includes(facts.begin(), facts.end(), subset.begin(), subset.end());
}

// facts ∪ extra; both canonical.
inline FactSet set_union(std::span<const FactId> facts, std::span<const FactId> extra) {
    FactSet out;
    out.reserve(facts.size() + extra.size());
    std::set_union(facts.begin(), facts.end(), extra.begin(), extra.end(),
                   std::back_inserter(out));
    return out;
}

inline bool sets_intersect(std::span<const FactId> a, std::span<const FactId> b) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else return true;
    }
    return false;
}

// Content-addressed state identity: a 128-bit hash of the canonical fact
// sequence. Stable across processes and runs; no per-process seeding.
struct StateKey {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    friend bool operator==(const StateKey&, const StateKey&) = default;
    friend auto operator<=>(const StateKey&, const StateKey&) = default;
};

struct StateKeyHash {
    std::size_t operator()(const StateKey& k) const noexcept {
        return static_cast<std::size_t>(k.lo ^ (k.hi * 0x9e3779b97f4a7c15ULL));
    }
};

// Hash of a canonical (sorted, unique) fact sequence. Precondition checked
// only in debug builds; use canonical_state_key for arbitrary input.
StateKey state_key_sorted(std::span<const FactId> sorted_facts);

// Order-independent key: canonicalizes a copy if needed, then hashes.
StateKey canonical_state_key(std::span<const FactId> facts);

std::string to_hex(const StateKey& k);

} // namespace aggen
