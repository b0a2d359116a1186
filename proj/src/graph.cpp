#include "aggen/graph.hpp"

#include <algorithm>

#include "aggen/errors.hpp"

namespace aggen {

// Moves are single-threaded handoffs (worker -> merge): shard payloads move,
// mutexes stay in place.
AttackGraph::AttackGraph(AttackGraph&& other) noexcept {
    for (std::size_t i = 0; i < kShardCount; ++i) {
        shards_[i].states = std::move(other.shards_[i].states);
        shards_[i].edges = std::move(other.shards_[i].edges);
    }
    next_id_.store(other.next_id_.load());
    edge_count_.store(other.edge_count_.load());
    root_ = other.root_;
    checksum_ = other.checksum_;
}

AttackGraph& AttackGraph::operator=(AttackGraph&& other) noexcept {
    if (this != &other) {
        for (std::size_t i = 0; i < kShardCount; ++i) {
            shards_[i].states = std::move(other.shards_[i].states);
            shards_[i].edges = std::move(other.shards_[i].edges);
        }
        next_id_.store(other.next_id_.load());
        edge_count_.store(other.edge_count_.load());
        root_ = other.root_;
        checksum_ = other.checksum_;
    }
    return *this;
}

AttackGraph::InsertResult AttackGraph::insert_state(const StateKey& key,
                                                    std::span<const FactId> facts) {
    Shard& shard = shards_[state_shard(key)];
    std::lock_guard<std::mutex> lock(shard.mutex);
    auto it = shard.states.find(key);
    if (it != shard.states.end()) {
        const FactSet& stored = it->second.facts;
        if (stored.size() != facts.size() ||
            !std::equal(stored.begin(), stored.end(), facts.begin())) {
            throw HashCollisionError("state key " + to_hex(key) +
                                     " maps to two distinct fact-sets");
        }
        return {it->second.local_id, false};
    }
    StateRecord record;
    record.key = key;
    record.facts.assign(facts.begin(), facts.end());
    record.local_id = next_id_.fetch_add(1, std::memory_order_relaxed);
    auto id = record.local_id;
    shard.states.emplace(key, std::move(record));
    return {id, true};
}

bool AttackGraph::insert_edge(const EdgeRecord& edge) {
    Shard& shard = shards_[edge_shard(edge)];
    std::lock_guard<std::mutex> lock(shard.mutex);
    if (shard.edges.insert(edge).second) {
        edge_count_.fetch_add(1, std::memory_order_relaxed);
        return true;
    }
    return false;
}

bool AttackGraph::contains_state(const StateKey& key) const {
    const Shard& shard = shards_[state_shard(key)];
    std::lock_guard<std::mutex> lock(shard.mutex);
    return shard.states.count(key) != 0;
}

void AttackGraph::reserve_states(std::uint64_t n) {
    const std::uint64_t per_shard = n / kShardCount + 1;
    for (auto& shard : shards_) {
        std::lock_guard<std::mutex> lock(shard.mutex);
        shard.states.reserve(per_shard);
    }
}

void AttackGraph::reserve_edges(std::uint64_t n) {
    const std::uint64_t per_shard = n / kShardCount + 1;
    for (auto& shard : shards_) {
        std::lock_guard<std::mutex> lock(shard.mutex);
        shard.edges.reserve(per_shard);
    }
}

std::vector<StateRecord> AttackGraph::states_by_id() const {
    std::vector<StateRecord> out;
    out.reserve(state_count());
    for_each_state([&out](const StateRecord& r) { out.push_back(r); });
    std::sort(out.begin(), out.end(),
              [](const StateRecord& a, const StateRecord& b) { return a.local_id < b.local_id; });
    return out;
}

std::vector<StateRecord> AttackGraph::states_by_key() const {
    std::vector<StateRecord> out;
    out.reserve(state_count());
    for_each_state([&out](const StateRecord& r) { out.push_back(r); });
    std::sort(out.begin(), out.end(),
              [](const StateRecord& a, const StateRecord& b) { return a.key < b.key; });
    return out;
}

std::vector<EdgeRecord> AttackGraph::edges_sorted() const {
    std::vector<EdgeRecord> out;
    out.reserve(edge_count());
    for_each_edge([&out](const EdgeRecord& e) { out.push_back(e); });
    std::sort(out.begin(), out.end());
    return out;
}

CanonicalForm canonical_form(const AttackGraph& g) {
    CanonicalForm form;
    form.root = g.root();
    form.state_keys.reserve(g.state_count());
    g.for_each_state([&form](const StateRecord& r) { form.state_keys.push_back(r.key); });
    std::sort(form.state_keys.begin(), form.state_keys.end());
    form.edges = g.edges_sorted();
    return form;
}

bool canonical_equal(const AttackGraph& a, const AttackGraph& b) {
    return canonical_form(a) == canonical_form(b);
}

} // namespace aggen
