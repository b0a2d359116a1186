#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "aggen/types.hpp"

namespace aggen {

// One AG node: canonical fact-set plus its content-addressed key. local_id
// is dense within the owning graph, assigned in first-insert order.
struct StateRecord {
    StateKey key;
    FactSet facts;
    std::uint32_t local_id = 0;
};

// One transition. Identity is the full (src, dst, exploit) triple, so a
// disjunctive vulnerability's records yield parallel edges.
struct EdgeRecord {
    StateKey src;
    StateKey dst;
    ExploitId exploit = 0;

    friend bool operator==(const EdgeRecord&, const EdgeRecord&) = default;
    friend auto operator<=>(const EdgeRecord&, const EdgeRecord&) = default;
};

struct EdgeRecordHash {
    std::size_t operator()(const EdgeRecord& e) const noexcept {
        std::uint64_t h = e.src.lo;
        h = (h ^ (e.dst.lo + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
        h ^= (static_cast<std::uint64_t>(e.exploit) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
        return static_cast<std::size_t>(h);
    }
};

// States and edges, deduplicated by StateKey / edge triple. Insertions are
// linearizable per key: shards carry their own locks, so phase-2 threads
// and the concurrent merge strategies share one instance directly.
class AttackGraph {
public:
    AttackGraph() = default;
    explicit AttackGraph(std::uint64_t checksum) : checksum_(checksum) {}

    AttackGraph(AttackGraph&& other) noexcept;
    AttackGraph& operator=(AttackGraph&& other) noexcept;
    AttackGraph(const AttackGraph&) = delete;
    AttackGraph& operator=(const AttackGraph&) = delete;

    struct InsertResult {
        std::uint32_t local_id;
        bool inserted;
    };

    // Check-and-insert. When the key already exists the stored fact-set is
    // verified against `facts`; a mismatch is a HashCollisionError.
    InsertResult insert_state(const StateKey& key, std::span<const FactId> facts);

    // Returns false when the triple is already present.
    bool insert_edge(const EdgeRecord& edge);

    bool contains_state(const StateKey& key) const;

    void set_root(const StateKey& key) { root_ = key; }
    const StateKey& root() const { return root_; }

    std::uint64_t state_count() const { return next_id_.load(std::memory_order_relaxed); }
    std::uint64_t edge_count() const { return edge_count_.load(std::memory_order_relaxed); }
    std::uint64_t checksum() const { return checksum_; }

    // Capacity hints ahead of bulk insertion (wire headers carry counts).
    void reserve_states(std::uint64_t n);
    void reserve_edges(std::uint64_t n);

    // Snapshots. Not safe concurrently with writers.
    std::vector<StateRecord> states_by_id() const;  // ascending local_id
    std::vector<StateRecord> states_by_key() const; // ascending StateKey (wire order)
    std::vector<EdgeRecord> edges_sorted() const;   // ascending (src, dst, exploit)

    template <typename Fn> void for_each_state(Fn&& fn) const {
        for (const auto& shard : shards_) {
            std::lock_guard<std::mutex> lock(shard.mutex);
            for (const auto& [key, record] : shard.states) {
                fn(record);
            }
        }
    }

    template <typename Fn> void for_each_edge(Fn&& fn) const {
        for (const auto& shard : shards_) {
            std::lock_guard<std::mutex> lock(shard.mutex);
            for (const auto& edge : shard.edges) {
                fn(edge);
            }
        }
    }

private:
    static constexpr std::size_t kShardCount = 64;

    struct Shard {
        mutable std::mutex mutex;
        std::unordered_map<StateKey, StateRecord, StateKeyHash> states;
        std::unordered_set<EdgeRecord, EdgeRecordHash> edges;
    };

    static std::size_t state_shard(const StateKey& key) {
        return static_cast<std::size_t>((key.lo >> 57) & (kShardCount - 1));
    }
    static std::size_t edge_shard(const EdgeRecord& e) {
        return static_cast<std::size_t>((EdgeRecordHash{}(e) >> 57) & (kShardCount - 1));
    }

    std::array<Shard, kShardCount> shards_;
    std::atomic<std::uint32_t> next_id_{0};
    std::atomic<std::uint64_t> edge_count_{0};
    StateKey root_;
    std::uint64_t checksum_ = 0;
};

// A worker's locally discovered slice of the state space, prior to merging.
struct PartialGraph {
    int owner_rank = 0;
    AttackGraph graph;
};

// Canonical identity of a graph: root key, state-key set, edge-triple set.
// Two graphs with equal forms are interchangeable regardless of local ids
// or discovery order.
struct CanonicalForm {
    StateKey root;
    std::vector<StateKey> state_keys; // sorted
    std::vector<EdgeRecord> edges;    // sorted

    friend bool operator==(const CanonicalForm&, const CanonicalForm&) = default;
};

CanonicalForm canonical_form(const AttackGraph& g);
bool canonical_equal(const AttackGraph& a, const AttackGraph& b);

} // namespace aggen
