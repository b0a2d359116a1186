#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aggen/graph.hpp"
#include "aggen/netmodel.hpp"

namespace aggen {

// Wire layout (all integers little-endian, fixed width):
//   magic "AGPG" | version u16 | owner rank u32 | spec checksum u64
//   state count u64
//   per state, sorted by StateKey: fact count u32, sorted FactIds u32[]
//   edge count u64
//   per edge: src state index u64, dst state index u64, exploit id u32
// Edges reference states by index into this message's own state table.
inline constexpr std::uint16_t kWireVersion = 1;

std::uint64_t wire_size_of_graph(const AttackGraph& g);

inline std::uint64_t wire_size(const PartialGraph& g) { return wire_size_of_graph(g.graph); }

// Deterministic given the graph contents: states sorted by key, edges by
// (src index, dst index, exploit).
std::vector<std::uint8_t> serialize_partial(const PartialGraph& g);

// Verifies magic, version, checksum against `spec`, and index bounds.
// Throws CorruptPartialError on any structural problem.
PartialGraph deserialize_partial(std::span<const std::uint8_t> bytes, const NetworkSpec& spec);

// Strategy "none": partials are dumped per rank instead of merged.
void write_partial_file(const PartialGraph& g, const std::string& path);
PartialGraph read_partial_file(const std::string& path, const NetworkSpec& spec);

} // namespace aggen
