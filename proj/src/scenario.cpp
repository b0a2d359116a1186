#include "aggen/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "aggen/errors.hpp"

namespace aggen {

namespace {

// Seeded splitmix64 stream; stable across platforms and standard library
// implementations, unlike <random> distributions.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n) via multiply-shift.
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

// First k of a seeded shuffle of 0..n-1, returned sorted.
std::vector<std::size_t> pick_k(std::size_t n, std::size_t k, SplitMix& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.bounded(i));
        std::swap(idx[i - 1], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::size_t fraction_count(double fraction, std::size_t total) {
    if (fraction < 0.0 || fraction > 1.0) {
        throw ValidationError("vulnerability fraction must be in [0, 1]");
    }
    return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
}

} // namespace

std::size_t TreeLayout::total_hosts() const {
    return workstations.size() +
           std::accumulate(workstations.begin(), workstations.end(), std::size_t{0});
}

std::size_t TreeLayout::vulnerable_hosts() const {
    std::size_t n = std::count(server_vulnerable.begin(), server_vulnerable.end(), true);
    for (const auto& row : ws_vulnerable) {
        n += std::count(row.begin(), row.end(), true);
    }
    return n;
}

TreeLayout resolve_tree_layout(const TreeScenarioParams& p) {
    TreeLayout layout;

    if (!p.per_server_workstations.empty()) {
        if (p.servers != 0 && p.per_server_workstations.size() != p.servers) {
            throw ValidationError("per-server workstation list does not match server count");
        }
        layout.workstations = p.per_server_workstations;
    } else {
        layout.workstations.assign(p.servers, p.workstations_per_server);
    }
    const std::size_t servers = layout.workstations.size();

    layout.server_vulnerable.assign(servers, false);
    if (!p.vulnerable_server_ids.empty()) {
        for (std::size_t id : p.vulnerable_server_ids) {
            if (id >= servers) {
                throw ValidationError("vulnerable server id " + std::to_string(id) +
                                      " out of range");
            }
            layout.server_vulnerable[id] = true;
        }
    } else if (p.vulnerable_server_fraction >= 0.0) {
        SplitMix rng(p.seed * 2 + 1);
        for (std::size_t id : pick_k(servers, fraction_count(p.vulnerable_server_fraction, servers), rng)) {
            layout.server_vulnerable[id] = true;
        }
    }

    layout.ws_vulnerable.resize(servers);
    for (std::size_t i = 0; i < servers; ++i) {
        layout.ws_vulnerable[i].assign(layout.workstations[i], false);
    }
    if (!p.vulnerable_ws_counts.empty()) {
        if (p.vulnerable_ws_counts.size() > servers) {
            throw ValidationError("vulnerable workstation counts exceed server count");
        }
        for (std::size_t i = 0; i < p.vulnerable_ws_counts.size(); ++i) {
            std::size_t k = p.vulnerable_ws_counts[i];
            if (k > layout.workstations[i]) {
                throw ValidationError("server " + std::to_string(i + 1) + " has only " +
                                      std::to_string(layout.workstations[i]) +
                                      " workstations, " + std::to_string(k) +
                                      " marked vulnerable");
            }
            std::fill_n(layout.ws_vulnerable[i].begin(), k, true);
        }
    } else if (p.vulnerable_ws_fraction >= 0.0) {
        // Fraction applies across all workstation slots, drawn globally.
        std::vector<std::pair<std::size_t, std::size_t>> slots;
        for (std::size_t i = 0; i < servers; ++i) {
            for (std::size_t j = 0; j < layout.workstations[i]; ++j) {
                slots.emplace_back(i, j);
            }
        }
        SplitMix rng(p.seed * 2 + 2);
        for (std::size_t pick :
             pick_k(slots.size(), fraction_count(p.vulnerable_ws_fraction, slots.size()), rng)) {
            auto [i, j] = slots[pick];
            layout.ws_vulnerable[i][j] = true;
        }
    }

    return layout;
}

NetworkSpec example_three_server() {
    NetworkSpec spec;
    spec.assets = {{"internet", "external"},
                   {"web-server", "server"},
                   {"file-server", "server"},
                   {"db-server", "server"}};

    FactId internet = spec.catalog.intern("internet-access");
    spec.initial = {internet};

    FactId web = spec.catalog.intern("root(web)");
    FactId file = spec.catalog.intern("root(file)");
    FactId db = spec.catalog.intern("root(db)");

    spec.exploits.push_back({0, "exploit-0", "", {internet}, {web}});
    spec.exploits.push_back({1, "exploit-1", "", {internet}, {file}});
    spec.exploits.push_back({2, "exploit-2a", "exploit-2", {web}, {db}});
    spec.exploits.push_back({3, "exploit-2b", "exploit-2", {file}, {db}});

    return spec;
}

NetworkSpec tree_network(const TreeScenarioParams& p) {
    TreeLayout layout = resolve_tree_layout(p);
    const std::size_t servers = layout.workstations.size();

    NetworkSpec spec;
    spec.assets.push_back({"internet", "external"});
    for (std::size_t i = 0; i < servers; ++i) {
        spec.assets.push_back({"server-" + std::to_string(i + 1), "server"});
        for (std::size_t j = 0; j < layout.workstations[i]; ++j) {
            spec.assets.push_back(
                {"ws-" + std::to_string(i + 1) + "-" + std::to_string(j + 1), "workstation"});
        }
    }

    FactId internet = spec.catalog.intern("internet-access");
    spec.initial = {internet};

    // Servers first: from the internet the attacker may compromise any
    // vulnerable server; workstation exploits then pivot off server roots.
    ExploitId next = 0;
    for (std::size_t i = 0; i < servers; ++i) {
        if (!layout.server_vulnerable[i]) {
            continue;
        }
        const std::string name = "server-" + std::to_string(i + 1);
        FactId root = spec.catalog.intern("root(" + name + ")");
        spec.exploits.push_back({next++, "exploit-" + name, "", {internet}, {root}});
    }
    for (std::size_t i = 0; i < servers; ++i) {
        const std::string server = "server-" + std::to_string(i + 1);
        for (std::size_t j = 0; j < layout.workstations[i]; ++j) {
            if (!layout.ws_vulnerable[i][j]) {
                continue;
            }
            FactId server_root = spec.catalog.intern("root(" + server + ")");
            const std::string ws =
                "ws-" + std::to_string(i + 1) + "-" + std::to_string(j + 1);
            FactId ws_root = spec.catalog.intern("root(" + ws + ")");
            spec.exploits.push_back({next++, "exploit-" + ws, "", {server_root}, {ws_root}});
        }
    }

    return spec;
}

CountPrediction predict_counts(const TreeScenarioParams& p) {
    TreeLayout layout = resolve_tree_layout(p);

    // Per vulnerable server subtree: reachable fact patterns are the empty
    // set or root(s) plus any subset of its vulnerable workstations.
    std::vector<std::size_t> ws_counts;
    for (std::size_t i = 0; i < layout.workstations.size(); ++i) {
        if (!layout.server_vulnerable[i]) {
            continue;
        }
        ws_counts.push_back(static_cast<std::size_t>(
            std::count(layout.ws_vulnerable[i].begin(), layout.ws_vulnerable[i].end(), true)));
    }

    CountPrediction out;
    out.states = 1;
    std::vector<BigInt> component_states;
    std::vector<BigInt> component_edges;
    for (std::size_t w : ws_counts) {
        BigInt n = 1 + (BigInt(1) << w);
        BigInt e = 1;
        if (w > 0) {
            e += BigInt(w) << (w - 1);
        }
        component_states.push_back(n);
        component_edges.push_back(e);
        out.states *= n;
    }

    out.edges = 0;
    for (std::size_t s = 0; s < ws_counts.size(); ++s) {
        BigInt rest = 1;
        for (std::size_t j = 0; j < ws_counts.size(); ++j) {
            if (j != s) {
                rest *= component_states[j];
            }
        }
        out.edges += component_edges[s] * rest;
    }

    return out;
}

TreeScenarioParams paper150_params() {
    TreeScenarioParams p;
    p.servers = 15;
    p.workstations_per_server = 9;
    p.vulnerable_server_ids = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    p.vulnerable_ws_counts = {2, 2, 2, 2, 2, 2, 2, 2, 2, 1, 1};
    return p;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

std::size_t parse_count(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) {
            throw std::invalid_argument(s);
        }
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ValidationError("invalid " + what + " in preset: '" + s + "'");
    }
}

double parse_fraction(const std::string& s) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size() || v < 0.0 || v > 1.0) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ValidationError("invalid vulnerability fraction in preset: '" + s + "'");
    }
}

} // namespace

Preset parse_preset(const std::string& text, std::uint64_t seed_override,
                    bool has_seed_override) {
    Preset preset;
    preset.name = text;

    if (text == "fig1") {
        return preset;
    }
    if (text == "paper-150") {
        preset.is_tree = true;
        preset.tree = paper150_params();
        if (has_seed_override) {
            preset.tree.seed = seed_override;
        }
        return preset;
    }
    if (text.rfind("tree:", 0) != 0) {
        throw ValidationError("unknown preset '" + text +
                              "' (expected fig1, paper-150, or tree:<S>x<W>:<vuln>[:<seed>])");
    }

    std::vector<std::string> parts = split(text, ':');
    if (parts.size() < 3 || parts.size() > 4) {
        throw ValidationError("malformed tree preset '" + text + "'");
    }

    std::vector<std::string> dims = split(parts[1], 'x');
    if (dims.size() != 2) {
        throw ValidationError("malformed tree dimensions '" + parts[1] + "' (expected <S>x<W>)");
    }

    TreeScenarioParams p;
    p.servers = parse_count(dims[0], "server count");
    p.workstations_per_server = parse_count(dims[1], "workstation count");

    const std::string& vuln = parts[2];
    if (vuln == "all") {
        p.vulnerable_server_fraction = 1.0;
        p.vulnerable_ws_fraction = 1.0;
    } else if (vuln.find(',') != std::string::npos) {
        std::vector<std::string> fr = split(vuln, ',');
        if (fr.size() != 2) {
            throw ValidationError("malformed vulnerability spec '" + vuln + "'");
        }
        p.vulnerable_server_fraction = parse_fraction(fr[0]);
        p.vulnerable_ws_fraction = parse_fraction(fr[1]);
    } else {
        double f = parse_fraction(vuln);
        p.vulnerable_server_fraction = f;
        p.vulnerable_ws_fraction = f;
    }

    if (parts.size() == 4) {
        p.seed = parse_count(parts[3], "seed");
    }
    if (has_seed_override) {
        p.seed = seed_override;
    }

    preset.is_tree = true;
    preset.tree = p;
    return preset;
}

NetworkSpec build_preset(const Preset& preset) {
    if (preset.is_tree) {
        return tree_network(preset.tree);
    }
    return example_three_server();
}

std::string format_with_commas(const BigInt& value) {
    std::string digits = value.str();
    std::string out;
    int run = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (run == 3 && *it != '-') {
            out += ',';
            run = 0;
        }
        out += *it;
        ++run;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

} // namespace aggen
