#pragma once

// Test-only reference enumerator. Deliberately shares nothing with the
// engine's machinery: states are std::set<std::string> of fact names, the
// reachable set is computed by naive fixpoint iteration (no hashing, no
// frontier queue), and comparisons decode the engine's output back to
// strings.

#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "aggen/graph.hpp"
#include "aggen/netmodel.hpp"

namespace oracle {

using State = std::set<std::string>;
using Edge = std::tuple<State, State, unsigned>; // src facts, dst facts, exploit index

struct Result {
    std::set<State> states;
    std::set<Edge> edges;
    State root;
};

Result enumerate(const aggen::NetworkSpec& spec);

// Decodes g through the spec's catalog into oracle terms.
Result decode_graph(const aggen::AttackGraph& g, const aggen::NetworkSpec& spec);

bool matches(const Result& expected, const aggen::AttackGraph& actual,
             const aggen::NetworkSpec& spec);

} // namespace oracle
