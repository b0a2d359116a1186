#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aggen/types.hpp"

namespace aggen {

// Interned alphabet of atomic security facts ("root(web)"). Ids are dense,
// 0-based, assigned in insertion order. Immutable after spec load.
class FactCatalog {
public:
    // Returns the existing id when s is already interned, else appends.
    // Throws ValidationError on an empty string.
    FactId intern(std::string_view s);

    std::optional<FactId> find(std::string_view s) const;
    const std::string& name(FactId id) const;
    std::size_t size() const { return entries_.size(); }
    const std::vector<std::string>& entries() const { return entries_; }

private:
    std::vector<std::string> entries_;
    std::unordered_map<std::string, FactId> index_;
};

// One vulnerability exploitation rule: conjunctive preconditions, added
// postconditions. Disjunctive vulnerabilities are encoded as multiple
// records sharing a group label.
struct Exploit {
    ExploitId id = 0;
    std::string label;
    std::string group; // empty = ungrouped
    FactSet pre;
    FactSet post;
};

struct Asset {
    std::string name;
    std::string kind;
};

// Full generation input. Exploit list order is the canonical expansion
// order everywhere; phase-1 replication depends on it.
struct NetworkSpec {
    FactCatalog catalog;
    std::vector<Asset> assets;
    std::vector<Exploit> exploits;
    FactSet initial;
};

struct Violation {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

// Checks: dangling fact ids, empty postconditions, pre/post overlap,
// empty initial set, exploit ids out of line with list positions.
// Violations are data, not failures.
ValidationReport validate_spec(const NetworkSpec& spec);

// Throws ValidationError carrying the report unless spec validates.
void require_valid(const NetworkSpec& spec);

// Stable fingerprint of catalog + exploits + initial; embedded in wire
// messages so partials from different specs can never be merged.
std::uint64_t spec_checksum(const NetworkSpec& spec);

// Parses the JSON spec document (see README for the schema). Fact strings
// intern in first-appearance order: `facts`, then `initial`, then each
// exploit's pre before post, in list order.
NetworkSpec load_spec_json(const std::string& text);
NetworkSpec load_spec_file(const std::string& path);

std::vector<std::string> decode_facts(const FactCatalog& catalog, const FactSet& facts);

} // namespace aggen
