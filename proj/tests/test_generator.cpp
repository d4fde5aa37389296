#include <catch2/catch_amalgamated.hpp>

#include <sinkcert/generator.hpp>
#include <sinkcert/structure.hpp>

#include "oracles.hpp"

using namespace sinkcert;

TEST_CASE("generation is deterministic in the seed") {
    GenSpec s;
    s.kind = "asymptotic";
    s.m = 6;
    s.n = 5;
    s.depth = 2;
    s.seed = 99;
    CHECK(serialize_problem(gen_instance(s)) == serialize_problem(gen_instance(s)));

    GenSpec other = s;
    other.seed = 100;
    CHECK(serialize_problem(gen_instance(s)) != serialize_problem(gen_instance(other)));
}

TEST_CASE("the built-in reference instance") {
    GenSpec s;
    s.kind = "soules";
    const Problem p = gen_instance(s);
    CHECK(p.m() == 2);
    CHECK(p.n() == 2);
    REQUIRE(p.edge_count() == 3);
    for (const auto& e : p.cost.entries) CHECK(e.c == Catch::Approx(-std::log(4.0)).margin(1e-15));
    CHECK(p.mu_rat == std::vector<Rational>{Rational(1, 2), Rational(1, 2)});
    CHECK(serialize_problem(p) == serialize_problem(oracles::soules()));

    GenSpec scaled = s;
    scaled.tau = 0.5;
    const Problem q = gen_instance(scaled);
    CHECK(q.tau == 0.5);
    CHECK(q.cost.entries[0].c == Catch::Approx(-0.5 * std::log(4.0)).margin(1e-15));
}

TEST_CASE("every kind lands in its class and validates") {
    auto sweep = [](const std::string& kind, ScalClass want, int depth) {
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            GenSpec s;
            s.kind = kind;
            s.m = 3 + static_cast<int>(seed % 4);
            s.n = 3 + static_cast<int>((seed / 2) % 4);
            s.depth = depth;
            s.seed = seed * 13 + 5;
            const Problem p = gen_instance(s);
            CHECK(validate(p).ok);
            CHECK(classify(p).cls == want);

            Rational mu_sum(0), nu_sum(0);
            for (const auto& r : p.mu_rat) mu_sum += r;
            for (const auto& r : p.nu_rat) nu_sum += r;
            CHECK(mu_sum == Rational(1));
            CHECK(nu_sum == Rational(1));
        }
    };
    sweep("positive", ScalClass::positive, 2);
    sweep("exact", ScalClass::exactly_scalable, 2);
    sweep("asymptotic", ScalClass::asymptotically_scalable, 2);
    sweep("asymptotic", ScalClass::asymptotically_scalable, 3);
}

TEST_CASE("planted metadata matches the requested shape") {
    for (int depth : {2, 3, 4}) {
        GenSpec s;
        s.kind = "asymptotic";
        s.m = depth + 3;
        s.n = depth + 2;
        s.depth = depth;
        s.seed = 7 * static_cast<std::uint64_t>(depth);
        const GeneratedInstance gi = gen_instance_full(s);
        REQUIRE(gi.planted.has_value());
        CHECK(static_cast<int>(gi.planted->blocks.size()) == depth);
        CHECK(gi.planted->ell == depth - 1);
        // the chain edges are always present
        std::set<std::pair<int, int>> dag(gi.planted->dag_edges.begin(),
                                          gi.planted->dag_edges.end());
        for (int b = 0; b + 1 < depth; ++b) CHECK(dag.count({b, b + 1}) == 1);
    }
}

TEST_CASE("positive costs respect the scale") {
    GenSpec s;
    s.kind = "positive";
    s.m = 5;
    s.n = 5;
    s.seed = 3;
    s.cost_scale = 2.5;
    const Problem p = gen_instance(s);
    CHECK(p.edge_count() == 25);
    for (const auto& e : p.cost.entries) {
        CHECK(e.c >= 0.0);
        CHECK(e.c <= 2.5);
    }
}

TEST_CASE("bad generator requests are rejected") {
    GenSpec s;
    s.kind = "exact";
    s.m = 1;
    s.n = 4;
    CHECK_THROWS_AS(gen_instance(s), std::invalid_argument);

    s.kind = "asymptotic";
    s.m = 6;
    s.n = 6;
    s.depth = 1;
    CHECK_THROWS_AS(gen_instance(s), std::invalid_argument);
    s.depth = 7;
    CHECK_THROWS_AS(gen_instance(s), std::invalid_argument);

    s.kind = "banded";
    s.depth = 2;
    CHECK_THROWS_AS(gen_instance(s), std::invalid_argument);
}
