#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aggen/expand.hpp"
#include "aggen/graph.hpp"
#include "aggen/merge.hpp"
#include "aggen/netmodel.hpp"
#include "aggen/profile.hpp"
#include "aggen/transport.hpp"

namespace aggen {

enum class TransportKind { Memory, Socket };

TransportKind parse_transport(const std::string& name); // memory|socket
std::string transport_name(TransportKind k);

// Per-worker configuration. All workers of a run must agree on everything
// except rank.
struct WorkerConfig {
    int comm_sz = 1;
    int n_threads = 1;
    std::uint64_t threshold_T = 0; // 0 = default 64 * comm_sz * n_threads
    int rank = 0;
    TransportKind transport = TransportKind::Memory;
    MergeOptions merge;
};

std::uint64_t effective_threshold(const WorkerConfig& cfg);

struct Phase1Result {
    PartialGraph partial;
    FrontierQueue frontier;
};

// Single-threaded BFS from the root until the frontier outgrows the
// threshold (or drains on small graphs). Deterministic: every worker
// running this on the same spec produces an identical partial and frontier.
Phase1Result phase1_seed(const NetworkSpec& spec, std::uint64_t threshold, int owner_rank = 0);

// Round-robin assignment of frontier positions to the comm_sz * n_threads
// global thread slots: position i goes to slot g = i mod slots, slot g
// belongs to worker rank g mod comm_sz, thread g div comm_sz.
std::vector<FrontierQueue> cyclic_partition(const FrontierQueue& queue, int comm_sz,
                                            int n_threads);

// The slice of a cyclic partition owned by one rank, indexed by thread.
std::vector<FrontierQueue> queues_for_rank(const std::vector<FrontierQueue>& slots, int comm_sz,
                                           int n_threads, int rank);

struct Phase2Stats {
    std::uint64_t expanded = 0; // states popped from thread queues
    std::uint64_t inserted = 0; // states newly discovered by this worker in phase 2
};

// Concurrent exploration: one thread per queue, each BFS-expanding into its
// own queue; the partial's state map doubles as the worker-shared visited
// set (per-key atomic check-and-insert).
Phase2Stats phase2_explore(PartialGraph& partial, std::vector<FrontierQueue> thread_queues,
                           const NetworkSpec& spec);

struct WorkerOutcome {
    std::optional<AttackGraph> graph; // rank 0 only (and never for strategy None)
    PhaseProfile profile;
};

// Runs phases 1-3 on one worker. Rank 0 returns the merged graph and the
// populated profile.
WorkerOutcome worker_main(const NetworkSpec& spec, const WorkerConfig& cfg, Transport& transport);

struct RunOptions {
    int comm_sz = 1;
    int n_threads = 1;
    std::uint64_t threshold = 0;
    TransportKind transport = TransportKind::Memory;
    MergeOptions merge;
};

struct RunOutcome {
    std::optional<AttackGraph> graph;
    PhaseProfile profile;
};

// In-process deployment: comm_sz worker thread groups inside this process,
// joined over the selected transport. Worker failures abort the run with a
// WorkerError identifying rank and phase.
RunOutcome run_parallel(const NetworkSpec& spec, const RunOptions& options);

} // namespace aggen
