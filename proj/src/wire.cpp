#include "aggen/wire.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "aggen/errors.hpp"
#include "aggen/types.hpp"

namespace aggen {

namespace {

class Writer {
public:
    explicit Writer(std::uint64_t reserve) { buf_.reserve(reserve); }

    void u16(std::uint16_t v) { u(v, 2); }
    void u32(std::uint32_t v) { u(v, 4); }
    void u64(std::uint64_t v) { u(v, 8); }
    void bytes(const void* p, std::size_t n) {
        const auto* src = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), src, src + n);
    }

    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    // Explicit little-endian, independent of host order.
    void u(std::uint64_t v, std::size_t width) {
        for (std::size_t i = 0; i < width; ++i) {
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }

    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint16_t u16() { return static_cast<std::uint16_t>(u(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(u(4)); }
    std::uint64_t u64() { return u(8); }

    void expect_magic(const char* magic) {
        need(4);
        if (std::memcmp(bytes_.data() + pos_, magic, 4) != 0) {
            throw CorruptPartialError("bad magic bytes in partial graph message");
        }
        pos_ += 4;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) {
        if (pos_ + n > bytes_.size()) {
            throw CorruptPartialError("truncated partial graph message");
        }
    }

    std::uint64_t u(std::size_t width) {
        need(width);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < width; ++i) {
            v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        }
        pos_ += width;
        return v;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

constexpr std::uint64_t kHeaderSize = 4 + 2 + 4 + 8 + 8; // magic..state count
constexpr std::uint64_t kEdgeSize = 8 + 8 + 4;

} // namespace

std::uint64_t wire_size_of_graph(const AttackGraph& g) {
    std::uint64_t size = kHeaderSize;
    g.for_each_state(
        [&size](const StateRecord& r) { size += 4 + 4 * static_cast<std::uint64_t>(r.facts.size()); });
    size += 8; // edge count
    size += kEdgeSize * g.edge_count();
    return size;
}

std::vector<std::uint8_t> serialize_partial(const PartialGraph& g) {
    const std::vector<StateRecord> states = g.graph.states_by_key();

    std::unordered_map<StateKey, std::uint64_t, StateKeyHash> index;
    index.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        index.emplace(states[i].key, i);
    }

    Writer w(wire_size(g));
    w.bytes("AGPG", 4);
    w.u16(kWireVersion);
    w.u32(static_cast<std::uint32_t>(g.owner_rank));
    w.u64(g.graph.checksum());

    w.u64(states.size());
    for (const StateRecord& r : states) {
        w.u32(static_cast<std::uint32_t>(r.facts.size()));
        for (FactId f : r.facts) {
            w.u32(f);
        }
    }

    struct WireEdge {
        std::uint64_t src;
        std::uint64_t dst;
        ExploitId exploit;
    };
    std::vector<WireEdge> edges;
    edges.reserve(g.graph.edge_count());
    g.graph.for_each_edge([&](const EdgeRecord& e) {
        auto src = index.find(e.src);
        auto dst = index.find(e.dst);
        if (src == index.end() || dst == index.end()) {
            throw CorruptPartialError("edge references a state missing from the partial");
        }
        edges.push_back({src->second, dst->second, e.exploit});
    });
    std::sort(edges.begin(), edges.end(), [](const WireEdge& a, const WireEdge& b) {
        return std::tie(a.src, a.dst, a.exploit) < std::tie(b.src, b.dst, b.exploit);
    });

    w.u64(edges.size());
    for (const WireEdge& e : edges) {
        w.u64(e.src);
        w.u64(e.dst);
        w.u32(e.exploit);
    }

    return w.take();
}

PartialGraph deserialize_partial(std::span<const std::uint8_t> bytes, const NetworkSpec& spec) {
    Reader r(bytes);
    r.expect_magic("AGPG");

    const std::uint16_t version = r.u16();
    if (version != kWireVersion) {
        throw CorruptPartialError("unsupported wire version " + std::to_string(version));
    }

    PartialGraph out;
    out.owner_rank = static_cast<int>(r.u32());

    const std::uint64_t checksum = r.u64();
    const std::uint64_t expected = spec_checksum(spec);
    if (checksum != expected) {
        throw CorruptPartialError("catalog checksum mismatch: partial was built from a different spec");
    }
    out.graph = AttackGraph(expected);
    out.graph.set_root(state_key_sorted(spec.initial));

    const std::uint64_t n_states = r.u64();
    out.graph.reserve_states(n_states);
    std::vector<StateKey> keys;
    keys.reserve(n_states);
    const FactId fact_limit = static_cast<FactId>(spec.catalog.size());
    for (std::uint64_t i = 0; i < n_states; ++i) {
        const std::uint32_t n_facts = r.u32();
        FactSet facts(n_facts);
        for (std::uint32_t j = 0; j < n_facts; ++j) {
            facts[j] = r.u32();
            if (facts[j] >= fact_limit) {
                throw CorruptPartialError("state fact id out of catalog range");
            }
        }
        if (!is_canonical(facts)) {
            throw CorruptPartialError("state fact-set is not in canonical order");
        }
        StateKey key = state_key_sorted(facts);
        keys.push_back(key);
        out.graph.insert_state(key, facts);
    }

    const std::uint64_t n_edges = r.u64();
    out.graph.reserve_edges(n_edges);
    for (std::uint64_t i = 0; i < n_edges; ++i) {
        const std::uint64_t src = r.u64();
        const std::uint64_t dst = r.u64();
        const ExploitId exploit = r.u32();
        if (src >= n_states || dst >= n_states) {
            throw CorruptPartialError("edge endpoint index out of range");
        }
        if (exploit >= spec.exploits.size()) {
            throw CorruptPartialError("edge exploit id out of range");
        }
        out.graph.insert_edge({keys[src], keys[dst], exploit});
    }

    if (!r.done()) {
        throw CorruptPartialError("trailing bytes after partial graph message");
    }
    return out;
}

void write_partial_file(const PartialGraph& g, const std::string& path) {
    std::vector<std::uint8_t> bytes = serialize_partial(g);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw CorruptPartialError("cannot open partial file for writing: " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw CorruptPartialError("short write to partial file: " + path);
    }
}

PartialGraph read_partial_file(const std::string& path, const NetworkSpec& spec) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CorruptPartialError("cannot open partial file: " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_partial(bytes, spec);
}

} // namespace aggen
