#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "aggen/netmodel.hpp"

namespace aggen {

using BigInt = boost::multiprecision::cpp_int;

// Parametric two-level tree: internet -> servers -> workstations.
// Vulnerable servers/workstations are given explicitly or as fractions
// resolved deterministically from `seed`.
struct TreeScenarioParams {
    std::size_t servers = 0;
    std::size_t workstations_per_server = 0;       // uniform, unless the list below is set
    std::vector<std::size_t> per_server_workstations;

    std::vector<std::size_t> vulnerable_server_ids; // explicit, wins over fraction
    double vulnerable_server_fraction = -1.0;       // < 0 = unset

    std::vector<std::size_t> vulnerable_ws_counts;  // per server, wins over fraction
    double vulnerable_ws_fraction = -1.0;

    std::uint64_t seed = 1;
};

// Fully resolved vulnerability layout (explicit sets, no fractions left).
struct TreeLayout {
    std::vector<std::size_t> workstations;        // per server
    std::vector<bool> server_vulnerable;
    std::vector<std::vector<bool>> ws_vulnerable; // [server][workstation]

    std::size_t total_hosts() const;
    std::size_t vulnerable_hosts() const;
};

// Seeded, platform-stable resolution. Throws ValidationError when explicit
// sets are inconsistent with the host counts.
TreeLayout resolve_tree_layout(const TreeScenarioParams& p);

struct CountPrediction {
    BigInt states;
    BigInt edges;
};

// The three-server example: web and file servers reachable from the
// internet, a database server whose OS bug is exploitable from a foothold
// on either. The disjunction is encoded as two records sharing group
// "exploit-2".
NetworkSpec example_three_server();

NetworkSpec tree_network(const TreeScenarioParams& p);

// Closed-form state/edge counts for a tree scenario. With v vulnerable
// servers and w_s vulnerable workstations under vulnerable server s:
//   N_s = 1 + 2^w_s,  e_s = 1 + w_s * 2^(w_s-1)
//   states = prod_s N_s,  edges = sum_s e_s * prod_{j != s} N_j
// Workstations under non-vulnerable servers are unreachable and contribute
// nothing. Exact integer arithmetic throughout.
CountPrediction predict_counts(const TreeScenarioParams& p);

// The reconstructed 150-host layout: 15 servers x 9 workstations; servers
// 1-10 vulnerable; two vulnerable workstations under each of servers 1-9,
// one under server 10, and one (unreachable) under server 11. 30 vulnerable
// hosts out of 150.
TreeScenarioParams paper150_params();

// Preset grammar: "fig1" | "paper-150" | "tree:<servers>x<ws>:<vuln>:<seed>"
// where <vuln> is "all", a fraction applied to servers and workstations
// alike, or "<server-frac>,<ws-frac>"; ":<seed>" is optional (default 1).
struct Preset {
    std::string name;
    bool is_tree = false;
    TreeScenarioParams tree; // valid when is_tree
};

Preset parse_preset(const std::string& text, std::uint64_t seed_override = 0,
                    bool has_seed_override = false);
NetworkSpec build_preset(const Preset& preset);

std::string format_with_commas(const BigInt& value);

} // namespace aggen
