#pragma once

#include <string>

#include "aggen/graph.hpp"
#include "aggen/netmodel.hpp"

namespace aggen {

// Graphviz DOT: nodes labeled by fact lists, edges by exploit label.
std::string export_dot(const AttackGraph& g, const NetworkSpec& spec);

// One "src_id dst_id exploit_id" line per edge; ids are the graph's dense
// local ids (first-seen order on the producing rank).
std::string export_edges(const AttackGraph& g);

// "states: N, edges: M, serialized bytes: B" where B is the wire size of
// the graph as a partial-graph message.
std::string export_summary(const AttackGraph& g);

} // namespace aggen
