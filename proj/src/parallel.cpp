#include "aggen/parallel.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "aggen/errors.hpp"

namespace aggen {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

} // namespace

TransportKind parse_transport(const std::string& name) {
    if (name == "memory") return TransportKind::Memory;
    if (name == "socket") return TransportKind::Socket;
    throw ValidationError("unknown transport '" + name + "' (expected memory|socket)");
}

std::string transport_name(TransportKind k) {
    return k == TransportKind::Memory ? "memory" : "socket";
}

std::uint64_t effective_threshold(const WorkerConfig& cfg) {
    if (cfg.threshold_T != 0) {
        return cfg.threshold_T;
    }
    return 64ULL * static_cast<std::uint64_t>(cfg.comm_sz) *
           static_cast<std::uint64_t>(cfg.n_threads);
}

Phase1Result phase1_seed(const NetworkSpec& spec, std::uint64_t threshold, int owner_rank) {
    if (threshold < 1) {
        throw ContractViolation("phase-1 threshold must be >= 1");
    }

    Phase1Result result;
    result.partial.owner_rank = owner_rank;
    result.partial.graph = AttackGraph(spec_checksum(spec));

    FactSet root_facts = spec.initial;
    StateKey root_key = state_key_sorted(root_facts);
    result.partial.graph.set_root(root_key);
    result.partial.graph.insert_state(root_key, root_facts);
    result.frontier.push_back({root_key, std::move(root_facts)});

    // Expand until the frontier outgrows T; on small graphs it drains.
    while (!result.frontier.empty() && result.frontier.size() <= threshold) {
        FrontierItem item = std::move(result.frontier.front());
        result.frontier.pop_front();
        expand_state(result.partial.graph, item, spec, [&result](FrontierItem&& discovered) {
            result.frontier.push_back(std::move(discovered));
        });
    }

    return result;
}

std::vector<FrontierQueue> cyclic_partition(const FrontierQueue& queue, int comm_sz,
                                            int n_threads) {
    if (comm_sz < 1 || n_threads < 1) {
        throw ContractViolation("cyclic_partition requires comm_sz >= 1 and n_threads >= 1");
    }
    const std::size_t slots = static_cast<std::size_t>(comm_sz) * n_threads;
    std::vector<FrontierQueue> out(slots);
    for (std::size_t i = 0; i < queue.size(); ++i) {
        out[i % slots].push_back(queue[i]);
    }
    return out;
}

std::vector<FrontierQueue> queues_for_rank(const std::vector<FrontierQueue>& slots, int comm_sz,
                                           int n_threads, int rank) {
    std::vector<FrontierQueue> mine;
    mine.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        mine.push_back(slots[static_cast<std::size_t>(t) * comm_sz + rank]);
    }
    return mine;
}

Phase2Stats phase2_explore(PartialGraph& partial, std::vector<FrontierQueue> thread_queues,
                           const NetworkSpec& spec) {
    std::atomic<std::uint64_t> expanded{0};
    std::atomic<std::uint64_t> inserted{0};
    std::vector<std::exception_ptr> errors(thread_queues.size());

    auto drain = [&](FrontierQueue queue, std::size_t slot) {
        try {
            std::uint64_t local_expanded = 0;
            std::uint64_t local_inserted = 0;
            while (!queue.empty()) {
                FrontierItem item = std::move(queue.front());
                queue.pop_front();
                ++local_expanded;
                expand_state(partial.graph, item, spec, [&](FrontierItem&& discovered) {
                    ++local_inserted;
                    queue.push_back(std::move(discovered));
                });
            }
            expanded.fetch_add(local_expanded, std::memory_order_relaxed);
            inserted.fetch_add(local_inserted, std::memory_order_relaxed);
        } catch (...) {
            errors[slot] = std::current_exception();
        }
    };

    if (thread_queues.size() == 1) {
        drain(std::move(thread_queues[0]), 0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(thread_queues.size());
        for (std::size_t t = 0; t < thread_queues.size(); ++t) {
            threads.emplace_back(drain, std::move(thread_queues[t]), t);
        }
        for (auto& t : threads) {
            t.join();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    return {expanded.load(), inserted.load()};
}

WorkerOutcome worker_main(const NetworkSpec& spec, const WorkerConfig& cfg, Transport& transport) {
    require_valid(spec);

    WorkerOutcome outcome;
    const auto t_start = Clock::now();

    Phase1Result phase1;
    try {
        phase1 = phase1_seed(spec, effective_threshold(cfg), cfg.rank);
    } catch (const std::exception& e) {
        throw WorkerError(cfg.rank, "phase 1", e.what());
    }
    outcome.profile.phase1_total = seconds_since(t_start);

    const auto t_phase2 = Clock::now();
    try {
        std::vector<FrontierQueue> slots =
            cyclic_partition(phase1.frontier, cfg.comm_sz, cfg.n_threads);
        phase2_explore(phase1.partial, queues_for_rank(slots, cfg.comm_sz, cfg.n_threads, cfg.rank),
                       spec);
    } catch (const std::exception& e) {
        throw WorkerError(cfg.rank, "phase 2", e.what());
    }
    outcome.profile.phase2_total = seconds_since(t_phase2);

    const auto t_phase3 = Clock::now();
    MergeOutcome merged;
    try {
        merged = run_merge(cfg.merge, transport, std::move(phase1.partial), spec);
    } catch (const std::exception& e) {
        throw WorkerError(cfg.rank, "phase 3 (merge)", e.what());
    }
    outcome.profile.phase3_total = seconds_since(t_phase3);
    outcome.profile.total_time = seconds_since(t_start);

    outcome.profile.comm_prep = merged.comm_prep;
    outcome.profile.send_recv = merged.send_recv;
    outcome.profile.merging_states = merged.merging_states;
    outcome.profile.merging_edges = merged.merging_edges;
    outcome.profile.duplicates_dropped = merged.duplicates_dropped;
    outcome.profile.messages_sent = merged.transfers;
    outcome.profile.bytes_sent = merged.bytes;
    if (merged.graph) {
        outcome.profile.states = merged.graph->state_count();
        outcome.profile.edges = merged.graph->edge_count();
        outcome.graph = std::move(merged.graph);
    }
    return outcome;
}

RunOutcome run_parallel(const NetworkSpec& spec, const RunOptions& options) {
    if (options.comm_sz < 1 || options.n_threads < 1) {
        throw ValidationError("run requires comm_sz >= 1 and n_threads >= 1");
    }
    require_valid(spec);

    const int comm_sz = options.comm_sz;
    std::vector<std::unique_ptr<Transport>> endpoints(comm_sz);
    std::unique_ptr<MemoryMesh> mesh;
    std::vector<std::unique_ptr<SocketTransport>> sockets;

    if (options.transport == TransportKind::Memory) {
        mesh = std::make_unique<MemoryMesh>(comm_sz);
        for (int r = 0; r < comm_sz; ++r) {
            endpoints[r] = mesh->endpoint(r);
        }
    } else {
        EndpointTable table;
        for (int r = 0; r < comm_sz; ++r) {
            auto socket = std::make_unique<SocketTransport>(r, comm_sz, 0);
            table.entries.push_back({"127.0.0.1", socket->port()});
            sockets.push_back(std::move(socket));
        }
        for (int r = 0; r < comm_sz; ++r) {
            sockets[r]->set_peers(table);
            endpoints[r] = std::move(sockets[r]);
        }
    }

    std::vector<WorkerOutcome> outcomes(comm_sz);
    std::vector<std::exception_ptr> errors(comm_sz);
    std::vector<std::thread> workers;
    workers.reserve(comm_sz);
    for (int r = 0; r < comm_sz; ++r) {
        workers.emplace_back([&, r] {
            try {
                WorkerConfig cfg;
                cfg.comm_sz = comm_sz;
                cfg.n_threads = options.n_threads;
                cfg.threshold_T = options.threshold;
                cfg.rank = r;
                cfg.transport = options.transport;
                cfg.merge = options.merge;
                outcomes[r] = worker_main(spec, cfg, *endpoints[r]);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) {
        w.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    RunOutcome out;
    out.graph = std::move(outcomes[0].graph);
    out.profile = outcomes[0].profile;
    return out;
}

} // namespace aggen
