#include "aggen/expand.hpp"

#include "aggen/errors.hpp"

namespace aggen {

std::vector<ExploitId> applicable_exploits(const FactSet& facts, const NetworkSpec& spec) {
    std::vector<ExploitId> out;
    for (const Exploit& e : spec.exploits) {
        if (exploit_applies(facts, e)) {
            out.push_back(e.id);
        }
    }
    return out;
}

FactSet apply_exploit(const FactSet& facts, const Exploit& e) {
    if (!exploit_applies(facts, e)) {
        throw ContractViolation("exploit '" + e.label + "' is not applicable at this state");
    }
    return set_union(facts, e.post);
}

AttackGraph generate_sequential(const NetworkSpec& spec, std::uint64_t state_limit) {
    require_valid(spec);

    AttackGraph g(spec_checksum(spec));
    FactSet root_facts = spec.initial;
    StateKey root_key = state_key_sorted(root_facts);
    g.set_root(root_key);
    g.insert_state(root_key, root_facts);

    FrontierQueue frontier;
    frontier.push_back({root_key, std::move(root_facts)});

    while (!frontier.empty()) {
        FrontierItem item = std::move(frontier.front());
        frontier.pop_front();
        expand_state(g, item, spec, [&](FrontierItem&& discovered) {
            if (state_limit != 0 && g.state_count() > state_limit) {
                throw ResourceLimitError("state limit " + std::to_string(state_limit) +
                                             " exceeded after " +
                                             std::to_string(g.state_count()) + " states",
                                         g.state_count());
            }
            frontier.push_back(std::move(discovered));
        });
    }

    return g;
}

} // namespace aggen
