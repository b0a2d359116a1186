#include "aggen/export.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "aggen/wire.hpp"

namespace aggen {

namespace {

std::string escape_label(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out;
}

struct IdEdge {
    std::uint32_t src;
    std::uint32_t dst;
    ExploitId exploit;
};

std::vector<IdEdge> edges_by_id(const AttackGraph& g) {
    std::unordered_map<StateKey, std::uint32_t, StateKeyHash> ids;
    ids.reserve(g.state_count());
    g.for_each_state([&ids](const StateRecord& r) { ids.emplace(r.key, r.local_id); });

    std::vector<IdEdge> edges;
    edges.reserve(g.edge_count());
    g.for_each_edge([&](const EdgeRecord& e) {
        edges.push_back({ids.at(e.src), ids.at(e.dst), e.exploit});
    });
    std::sort(edges.begin(), edges.end(), [](const IdEdge& a, const IdEdge& b) {
        return std::tie(a.src, a.dst, a.exploit) < std::tie(b.src, b.dst, b.exploit);
    });
    return edges;
}

} // namespace

std::string export_dot(const AttackGraph& g, const NetworkSpec& spec) {
    std::ostringstream os;
    os << "digraph attack_graph {\n";
    os << "  rankdir=TB;\n";
    os << "  node [shape=box];\n";

    for (const StateRecord& r : g.states_by_id()) {
        os << "  s" << r.local_id << " [label=\"";
        const auto names = decode_facts(spec.catalog, r.facts);
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) os << "\\n";
            os << escape_label(names[i]);
        }
        os << "\"];\n";
    }

    for (const IdEdge& e : edges_by_id(g)) {
        os << "  s" << e.src << " -> s" << e.dst << " [label=\""
           << escape_label(spec.exploits.at(e.exploit).label) << "\"];\n";
    }

    os << "}\n";
    return os.str();
}

std::string export_edges(const AttackGraph& g) {
    std::ostringstream os;
    for (const IdEdge& e : edges_by_id(g)) {
        os << e.src << ' ' << e.dst << ' ' << e.exploit << '\n';
    }
    return os.str();
}

std::string export_summary(const AttackGraph& g) {
    std::ostringstream os;
    os << "states: " << g.state_count() << ", edges: " << g.edge_count()
       << ", serialized bytes: " << wire_size_of_graph(g);
    return os.str();
}

} // namespace aggen
