#include "aggen/merge.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>
#include <vector>

#include "aggen/errors.hpp"
#include "aggen/wire.hpp"

namespace aggen {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

} // namespace

MergeStrategy parse_strategy(const std::string& name) {
    if (name == "sequential") return MergeStrategy::Sequential;
    if (name == "multi") return MergeStrategy::MultiReceiver;
    if (name == "pipeline") return MergeStrategy::Pipeline;
    if (name == "hier") return MergeStrategy::Hierarchical;
    if (name == "none") return MergeStrategy::None;
    throw ValidationError("unknown merge strategy '" + name +
                          "' (expected sequential|multi|pipeline|hier|none)");
}

std::string strategy_name(MergeStrategy s) {
    switch (s) {
    case MergeStrategy::Sequential: return "sequential";
    case MergeStrategy::MultiReceiver: return "multi";
    case MergeStrategy::Pipeline: return "pipeline";
    case MergeStrategy::Hierarchical: return "hier";
    case MergeStrategy::None: return "none";
    }
    return "?";
}

MergeStats merge_into(AttackGraph& master, const PartialGraph& incoming) {
    if (master.checksum() != incoming.graph.checksum()) {
        throw CorruptPartialError("cannot merge partials built from different specs");
    }

    MergeStats stats;

    auto t0 = Clock::now();
    incoming.graph.for_each_state([&](const StateRecord& r) {
        if (master.insert_state(r.key, r.facts).inserted) {
            ++stats.states_added;
        } else {
            ++stats.duplicate_states;
        }
    });
    stats.states_seconds = seconds_since(t0);

    auto t1 = Clock::now();
    incoming.graph.for_each_edge([&](const EdgeRecord& e) {
        if (!master.contains_state(e.src) || !master.contains_state(e.dst)) {
            throw CorruptPartialError("incoming edge references a state absent from the merge");
        }
        if (master.insert_edge(e)) {
            ++stats.edges_added;
        } else {
            ++stats.duplicate_edges;
        }
    });
    stats.edges_seconds = seconds_since(t1);

    return stats;
}

namespace {

// Tracks the master-side breakdown plus global counters; safe to update
// from receiver/merger threads.
struct SharedProfile {
    std::mutex mutex;
    double comm_prep = 0;
    double send_recv = 0;
    double merging_states = 0;
    double merging_edges = 0;
    std::uint64_t transfers = 0;
    std::uint64_t bytes = 0;
    std::uint64_t duplicates = 0;

    void add_merge(const MergeStats& stats) {
        std::lock_guard<std::mutex> lock(mutex);
        merging_states += stats.states_seconds;
        merging_edges += stats.edges_seconds;
        duplicates += stats.duplicates_dropped();
    }
};

// Transfer/byte counters are sender-side only, so summing per-rank stats
// yields the true number of partial-graph movements.
std::vector<std::uint8_t> timed_recv(Transport& transport, int src, SharedProfile& prof) {
    auto t0 = Clock::now();
    std::vector<std::uint8_t> payload = transport.recv(src);
    double elapsed = seconds_since(t0);
    std::lock_guard<std::mutex> lock(prof.mutex);
    prof.send_recv += elapsed;
    return payload;
}

PartialGraph timed_decode(const std::vector<std::uint8_t>& payload, const NetworkSpec& spec,
                          SharedProfile& prof) {
    auto t0 = Clock::now();
    PartialGraph partial = deserialize_partial(payload, spec);
    double elapsed = seconds_since(t0);
    std::lock_guard<std::mutex> lock(prof.mutex);
    prof.comm_prep += elapsed;
    return partial;
}

void send_partial(Transport& transport, int dst, const PartialGraph& g, SharedProfile& prof) {
    auto t0 = Clock::now();
    std::vector<std::uint8_t> payload = serialize_partial(g);
    const double prep = seconds_since(t0);
    const std::uint64_t size = payload.size();

    auto t1 = Clock::now();
    transport.send(dst, std::move(payload));
    const double sent = seconds_since(t1);

    std::lock_guard<std::mutex> lock(prof.mutex);
    prof.comm_prep += prep;
    prof.send_recv += sent;
    prof.transfers += 1;
    prof.bytes += size;
}

// Control frame: per-rank transfer totals reported to the master after the
// strategy completes. "AGST" + rank u32 + transfers u64 + bytes u64 +
// duplicates u64, little-endian.
std::vector<std::uint8_t> encode_stats(int rank, const SharedProfile& prof) {
    std::vector<std::uint8_t> out;
    out.reserve(32);
    out.insert(out.end(), {'A', 'G', 'S', 'T'});
    auto put32 = [&out](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    auto put64 = [&out](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    put32(static_cast<std::uint32_t>(rank));
    put64(prof.transfers);
    put64(prof.bytes);
    put64(prof.duplicates);
    return out;
}

void apply_stats_frame(const std::vector<std::uint8_t>& frame, SharedProfile& prof) {
    if (frame.size() != 32 || std::memcmp(frame.data(), "AGST", 4) != 0) {
        throw TransportError("malformed stats control frame");
    }
    auto get64 = [&frame](std::size_t offset) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(frame[offset + i]) << (8 * i);
        }
        return v;
    };
    std::lock_guard<std::mutex> lock(prof.mutex);
    prof.transfers += get64(8);
    prof.bytes += get64(16);
    prof.duplicates += get64(24);
}

// Fixed-capacity buffer queue between pipeline producers and consumers.
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    void push(std::vector<std::uint8_t> item) {
        std::unique_lock<std::mutex> lock(mutex_);
        not_full_.wait(lock, [this] { return queue_.size() < capacity_; });
        queue_.push_back(std::move(item));
        not_empty_.notify_one();
    }

    // Empty optional once closed and drained.
    std::optional<std::vector<std::uint8_t>> pop() {
        std::unique_lock<std::mutex> lock(mutex_);
        not_empty_.wait(lock, [this] { return !queue_.empty() || closed_; });
        if (queue_.empty()) {
            return std::nullopt;
        }
        std::vector<std::uint8_t> item = std::move(queue_.front());
        queue_.pop_front();
        not_full_.notify_one();
        return item;
    }

    void close() {
        std::lock_guard<std::mutex> lock(mutex_);
        closed_ = true;
        not_empty_.notify_all();
    }

private:
    std::mutex mutex_;
    std::condition_variable not_full_;
    std::condition_variable not_empty_;
    std::deque<std::vector<std::uint8_t>> queue_;
    std::size_t capacity_;
    bool closed_ = false;
};

void master_sequential(Transport& transport, AttackGraph& master, const NetworkSpec& spec,
                       SharedProfile& prof) {
    for (int src = 1; src < transport.comm_sz(); ++src) {
        std::vector<std::uint8_t> payload = timed_recv(transport, src, prof);
        PartialGraph incoming = timed_decode(payload, spec, prof);
        prof.add_merge(merge_into(master, incoming));
    }
}

void master_multi_receiver(Transport& transport, AttackGraph& master, const NetworkSpec& spec,
                           SharedProfile& prof) {
    std::vector<std::thread> receivers;
    std::vector<std::exception_ptr> errors(transport.comm_sz());
    for (int src = 1; src < transport.comm_sz(); ++src) {
        receivers.emplace_back([&, src] {
            try {
                std::vector<std::uint8_t> payload = timed_recv(transport, src, prof);
                PartialGraph incoming = timed_decode(payload, spec, prof);
                prof.add_merge(merge_into(master, incoming));
            } catch (...) {
                errors[src] = std::current_exception();
            }
        });
    }
    for (auto& t : receivers) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

void master_pipeline(Transport& transport, AttackGraph& master, const NetworkSpec& spec,
                     const MergeOptions& options, SharedProfile& prof) {
    const int remotes = transport.comm_sz() - 1;
    const int producers = options.pipeline_producers > 0
                              ? std::min(options.pipeline_producers, remotes)
                              : remotes;
    const int consumers = std::max(1, options.pipeline_consumers);

    BoundedQueue queue(std::max<std::size_t>(1, options.pipeline_capacity));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(producers) + consumers);
    std::atomic<std::size_t> error_index{0};
    auto record_error = [&errors, &error_index] {
        errors[error_index.fetch_add(1)] = std::current_exception();
    };

    std::vector<std::thread> producer_threads;
    for (int p = 0; p < producers; ++p) {
        producer_threads.emplace_back([&, p] {
            try {
                // Source ranks are statically split round-robin.
                for (int src = 1 + p; src <= remotes; src += producers) {
                    queue.push(timed_recv(transport, src, prof));
                }
            } catch (...) {
                record_error();
            }
        });
    }

    std::vector<std::thread> consumer_threads;
    for (int c = 0; c < consumers; ++c) {
        consumer_threads.emplace_back([&] {
            try {
                while (auto payload = queue.pop()) {
                    PartialGraph incoming = timed_decode(*payload, spec, prof);
                    prof.add_merge(merge_into(master, incoming));
                }
            } catch (...) {
                record_error();
            }
        });
    }

    for (auto& t : producer_threads) {
        t.join();
    }
    queue.close();
    for (auto& t : consumer_threads) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// Binomial-tree reduction rooted at rank 0: in round k, ranks congruent to
// 2^k mod 2^(k+1) send their accumulated partial down by 2^k. comm_sz-1
// transfers over ceil(log2 comm_sz) rounds.
void hierarchical(Transport& transport, PartialGraph& local, const NetworkSpec& spec,
                  SharedProfile& prof, std::uint32_t& rounds) {
    const int rank = transport.rank();
    const int comm_sz = transport.comm_sz();
    for (int step = 1; step < comm_sz; step <<= 1) {
        const int block = step << 1;
        if (rank % block == step) {
            send_partial(transport, rank - step, local, prof);
            return; // this rank's partial has been handed off
        }
        if (rank % block == 0 && rank + step < comm_sz) {
            std::vector<std::uint8_t> payload = timed_recv(transport, rank + step, prof);
            PartialGraph incoming = timed_decode(payload, spec, prof);
            prof.add_merge(merge_into(local.graph, incoming));
            ++rounds;
        }
    }
}

} // namespace

MergeOutcome run_merge(const MergeOptions& options, Transport& transport, PartialGraph local,
                       const NetworkSpec& spec) {
    const int rank = transport.rank();
    const int comm_sz = transport.comm_sz();

    MergeOutcome outcome;
    SharedProfile prof;

    if (options.strategy == MergeStrategy::None) {
        auto t0 = Clock::now();
        std::string path = options.dump_dir + "/partial-r" + std::to_string(rank) + ".agpg";
        write_partial_file(local, path);
        outcome.comm_prep = seconds_since(t0);
        return outcome;
    }

    if (rank != 0) {
        switch (options.strategy) {
        case MergeStrategy::Sequential:
        case MergeStrategy::MultiReceiver:
        case MergeStrategy::Pipeline:
            send_partial(transport, 0, local, prof);
            break;
        case MergeStrategy::Hierarchical: {
            std::uint32_t rounds = 0;
            hierarchical(transport, local, spec, prof, rounds);
            break;
        }
        case MergeStrategy::None:
            break;
        }
        transport.send(0, encode_stats(rank, prof));
        return outcome;
    }

    // Rank 0: merge everything into the local partial's graph; ids continue
    // in first-seen order.
    switch (options.strategy) {
    case MergeStrategy::Sequential:
        master_sequential(transport, local.graph, spec, prof);
        break;
    case MergeStrategy::MultiReceiver:
        master_multi_receiver(transport, local.graph, spec, prof);
        break;
    case MergeStrategy::Pipeline:
        master_pipeline(transport, local.graph, spec, options, prof);
        break;
    case MergeStrategy::Hierarchical:
        hierarchical(transport, local, spec, prof, outcome.rounds);
        break;
    case MergeStrategy::None:
        break;
    }

    for (int src = 1; src < comm_sz; ++src) {
        apply_stats_frame(transport.recv(src), prof);
    }

    outcome.graph = std::move(local.graph);
    outcome.comm_prep = prof.comm_prep;
    outcome.send_recv = prof.send_recv;
    outcome.merging_states = prof.merging_states;
    outcome.merging_edges = prof.merging_edges;
    outcome.transfers = prof.transfers;
    outcome.bytes = prof.bytes;
    outcome.duplicates_dropped = prof.duplicates;
    return outcome;
}

} // namespace aggen
