#include "oracle.hpp"

#include <algorithm>
#include <map>

namespace oracle {

namespace {

State decode(const aggen::FactCatalog& catalog, const aggen::FactSet& facts) {
    State out;
    for (aggen::FactId f : facts) {
        out.insert(catalog.name(f));
    }
    return out;
}

bool subset_of(const State& sub, const State& super) {
    return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

} // namespace

Result enumerate(const aggen::NetworkSpec& spec) {
    struct Rule {
        State pre;
        State post;
        unsigned index;
    };
    std::vector<Rule> rules;
    for (std::size_t i = 0; i < spec.exploits.size(); ++i) {
        rules.push_back({decode(spec.catalog, spec.exploits[i].pre),
                         decode(spec.catalog, spec.exploits[i].post), static_cast<unsigned>(i)});
    }

    Result result;
    result.root = decode(spec.catalog, spec.initial);
    result.states.insert(result.root);

    // Fixpoint: keep applying every rule to every known state until neither
    // the state set nor the edge set grows.
    bool changed = true;
    while (changed) {
        changed = false;
        std::set<State> snapshot = result.states;
        for (const State& s : snapshot) {
            for (const Rule& rule : rules) {
                if (!subset_of(rule.pre, s) || subset_of(rule.post, s)) {
                    continue;
                }
                State next = s;
                next.insert(rule.post.begin(), rule.post.end());
                if (result.states.insert(next).second) {
                    changed = true;
                }
                if (result.edges.insert({s, next, rule.index}).second) {
                    changed = true;
                }
            }
        }
    }

    return result;
}

Result decode_graph(const aggen::AttackGraph& g, const aggen::NetworkSpec& spec) {
    Result out;

    std::vector<aggen::StateRecord> states = g.states_by_id();
    std::map<aggen::StateKey, State> by_key;
    for (const auto& record : states) {
        State s = decode(spec.catalog, record.facts);
        by_key.emplace(record.key, s);
        out.states.insert(std::move(s));
    }

    g.for_each_edge([&](const aggen::EdgeRecord& e) {
        out.edges.insert({by_key.at(e.src), by_key.at(e.dst), e.exploit});
    });

    auto root = by_key.find(g.root());
    if (root != by_key.end()) {
        out.root = root->second;
    }
    return out;
}

bool matches(const Result& expected, const aggen::AttackGraph& actual,
             const aggen::NetworkSpec& spec) {
    Result decoded = decode_graph(actual, spec);
    return decoded.states == expected.states && decoded.edges == expected.edges &&
           decoded.root == expected.root;
}

} // namespace oracle
