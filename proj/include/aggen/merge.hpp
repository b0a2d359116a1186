#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "aggen/graph.hpp"
#include "aggen/netmodel.hpp"
#include "aggen/transport.hpp"

namespace aggen {

// Phase-3 variants. All produce canonical-equal graphs.
//   Sequential    master receives ranks 1..comm_sz-1 in order, merging each
//   MultiReceiver one receiver-merger thread per remote rank
//   Pipeline      producer threads receive, consumer threads merge
//   Hierarchical  binomial-tree reduction rooted at rank 0
//   None          every rank dumps its partial to disk; no merge
enum class MergeStrategy { Sequential, MultiReceiver, Pipeline, Hierarchical, None };

MergeStrategy parse_strategy(const std::string& name); // sequential|multi|pipeline|hier|none
std::string strategy_name(MergeStrategy s);

struct MergeStats {
    std::uint64_t states_added = 0;
    std::uint64_t edges_added = 0;
    std::uint64_t duplicate_states = 0;
    std::uint64_t duplicate_edges = 0;
    double states_seconds = 0;
    double edges_seconds = 0;

    std::uint64_t duplicates_dropped() const { return duplicate_states + duplicate_edges; }
};

// Inserts every incoming state (verifying fact-set equality when the key is
// already present) and every incoming edge, endpoints remapped by StateKey.
// Safe to run concurrently against one master from several threads.
MergeStats merge_into(AttackGraph& master, const PartialGraph& incoming);

struct MergeOptions {
    MergeStrategy strategy = MergeStrategy::Sequential;
    int pipeline_producers = 0;      // 0 = one per remote rank
    int pipeline_consumers = 2;
    std::size_t pipeline_capacity = 4; // buffered partials before producers block
    std::string dump_dir = ".";      // strategy None: partial-r<rank>.agpg files
};

struct MergeOutcome {
    std::optional<AttackGraph> graph; // rank 0, except strategy None

    // Master-side phase-3 breakdown.
    double comm_prep = 0;      // serialize + deserialize
    double send_recv = 0;      // blocked in transport
    double merging_states = 0;
    double merging_edges = 0;

    // Totals across all ranks (piggybacked on control frames).
    std::uint64_t transfers = 0; // partial-graph payloads moved
    std::uint64_t bytes = 0;
    std::uint64_t duplicates_dropped = 0;
    std::uint32_t rounds = 0;    // hierarchical reduction rounds at rank 0
};

// Runs the selected strategy. Every rank calls this after phase 2; only
// rank 0 gets a graph back. Transfer/byte counters cover partial-graph
// payloads only, not control frames.
MergeOutcome run_merge(const MergeOptions& options, Transport& transport, PartialGraph local,
                       const NetworkSpec& spec);

} // namespace aggen
