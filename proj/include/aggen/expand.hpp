#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "aggen/graph.hpp"
#include "aggen/netmodel.hpp"
#include "aggen/types.hpp"

namespace aggen {

// A discovered-but-unexpanded state carried on a frontier.
struct FrontierItem {
    StateKey key;
    FactSet facts;
};

using FrontierQueue = std::deque<FrontierItem>;

// Exploits firing at `facts`, in spec order: pre ⊆ facts and post ⊄ facts
// (the transition must add at least one fact, which also forbids self-loops).
std::vector<ExploitId> applicable_exploits(const FactSet& facts, const NetworkSpec& spec);

inline bool exploit_applies(const FactSet& facts, const Exploit& e) {
    return is_subset(e.pre, facts) && !is_subset(e.post, facts);
}

// facts ∪ e.post; throws ContractViolation unless e is applicable at facts.
FactSet apply_exploit(const FactSet& facts, const Exploit& e);

// Expands one state: inserts every derived state and its edge into g, and
// hands newly inserted states to on_new. Shared expansion step of the
// sequential generator and both parallel phases.
template <typename OnNew>
void expand_state(AttackGraph& g, const FrontierItem& item, const NetworkSpec& spec,
                  OnNew&& on_new) {
    for (std::size_t i = 0; i < spec.exploits.size(); ++i) {
        const Exploit& e = spec.exploits[i];
        if (!exploit_applies(item.facts, e)) {
            continue;
        }
        FactSet derived = set_union(item.facts, e.post);
        StateKey key = state_key_sorted(derived);
        auto [id, inserted] = g.insert_state(key, derived);
        g.insert_edge({item.key, key, e.id});
        if (inserted) {
            on_new(FrontierItem{key, std::move(derived)});
        }
    }
}

// Single-threaded exhaustive BFS from the root state. The correctness
// oracle for every parallel configuration: deterministic discovery order,
// FIFO frontier, exploit order = spec order. state_limit 0 = unlimited;
// exceeding it throws ResourceLimitError with the count reached.
AttackGraph generate_sequential(const NetworkSpec& spec, std::uint64_t state_limit = 0);

} // namespace aggen
