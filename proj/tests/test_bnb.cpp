#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "helpers.hpp"
#include "pomdpml/bnb.hpp"
#include "pomdpml/mdp.hpp"

using namespace pomdpml;
using testutil::load_bench;

namespace {

MilpResult solve_bench(const PomdpInstance& m, const RewardSpec& spec, bool cuts = true,
                       MilpParams params = {}) {
    const auto model = build_memoryless_model(m, spec, {.cuts = cuts, .integral = true});
    return solve_milp(model, m, spec, params);
}

}  // namespace

TEST_CASE("an integral root closes in one node") {
    const auto m = testutil::degenerate_instance();
    const auto spec = RewardSpec::plain(m, 0);
    const auto res = solve_bench(m, spec);
    CHECK(res.status == MilpStatus::Optimal);
    CHECK(res.nodes == 1);
    CHECK(res.incumbent == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("single stage picks the best observation-blind action") {
    const auto m = load_bench("web-mall");
    const auto spec = RewardSpec::plain(m, 0);
    const auto res = solve_bench(m, spec);
    REQUIRE(res.status == MilpStatus::Optimal);
    double expect = -1e300;
    for (std::size_t a = 0; a < m.n_actions(); ++a) {
        double q = 0.0;
        for (std::size_t s = 0; s < m.n_states(); ++s) q += m.initial_belief[s] * m.reward(s, a);
        expect = std::max(expect, q);
    }
    CHECK(res.incumbent == Catch::Approx(expect).margin(1e-6));
}

TEST_CASE("branch-and-bound matches enumeration on small instances") {
    struct Case {
        const char* name;
        int horizon;
    };
    for (const Case c : {Case{"tiger", 1}, Case{"tiger", 2}, Case{"paint", 1}, Case{"paint", 2},
                         Case{"ejs2", 2}, Case{"ejs2", 3}, Case{"web-mall", 2}, Case{"1d", 2}}) {
        const auto m = load_bench(c.name);
        const auto spec = RewardSpec::plain(m, c.horizon);
        const auto enumd = enumerate_optimal(m, spec);
        const auto res = solve_bench(m, spec);
        INFO(c.name << " T=" << c.horizon);
        REQUIRE(res.status == MilpStatus::Optimal);
        CHECK(res.incumbent == Catch::Approx(enumd.value).margin(1e-6));
        CHECK(res.incumbent <= res.bound + 1e-6);
        CHECK(res.gap <= 1e-6 + 1e-12);
    }
}

TEST_CASE("tail-closed milp matches enumeration on tiger") {
    const auto m = load_bench("tiger");
    const auto tail = solve_mdp_infinite(m);
    const auto spec = RewardSpec::tilde(m, 2, tail.values, m.discount);
    const auto res = solve_bench(m, spec);
    REQUIRE(res.status == MilpStatus::Optimal);
    CHECK(res.incumbent == Catch::Approx(168.6225).margin(1e-6));
    CHECK(res.incumbent_policy.deterministic);
    CHECK(res.incumbent_policy.mode_action(0, 0) == 0);  // listen first
}

TEST_CASE("anytime invariants hold under a tiny time limit") {
    const auto m = load_bench("paint");
    const auto spec = RewardSpec::plain(m, 2);
    MilpParams params;
    params.time_limit_seconds = 1e-4;
    const auto res = solve_bench(m, spec, true, params);
    CHECK(res.status == MilpStatus::TimeLimit);
    CHECK(res.has_incumbent);
    CHECK(res.incumbent <= res.bound + 1e-6);
}

TEST_CASE("node limits stop the search honestly") {
    const auto m = load_bench("tiger");
    const auto spec = RewardSpec::plain(m, 2);
    MilpParams params;
    params.node_limit = 2;
    const auto res = solve_bench(m, spec, false, params);
    CHECK(res.status == MilpStatus::NodeLimit);
    CHECK(res.has_incumbent);
    const auto enumd = enumerate_optimal(m, spec);
    CHECK(res.incumbent <= enumd.value + 1e-9);
    CHECK(res.bound >= enumd.value - 1e-9);
}

TEST_CASE("the search is deterministic") {
    const auto m = load_bench("ejs2");
    const auto spec = RewardSpec::plain(m, 3);
    const auto a = solve_bench(m, spec);
    const auto b = solve_bench(m, spec);
    CHECK(a.nodes == b.nodes);
    CHECK(a.incumbent == b.incumbent);
    CHECK(a.bound == b.bound);
}

TEST_CASE("rounded policies are always feasible deterministic policies") {
    const auto m = load_bench("paint");
    const auto spec = RewardSpec::plain(m, 2);
    const auto res = solve_bench(m, spec);
    REQUIRE(res.has_incumbent);
    CHECK(res.incumbent_policy.deterministic);
    CHECK(res.incumbent_policy.validate().ok());
}

TEST_CASE("progress lines appear at the configured cadence") {
    const auto m = load_bench("tiger");
    const auto spec = RewardSpec::plain(m, 2);
    std::ostringstream log;
    MilpParams params;
    params.log = &log;
    params.log_every = 1;
    solve_bench(m, spec, false, params);
    CHECK(log.str().find("node=") != std::string::npos);
    CHECK(log.str().find("bound=") != std::string::npos);
    CHECK(log.str().find("incumbent=") != std::string::npos);
}

TEST_CASE("cuts never change the optimum, only the tree") {
    const auto m = load_bench("web-mall");
    const auto spec = RewardSpec::plain(m, 2);
    const auto with = solve_bench(m, spec, true);
    const auto without = solve_bench(m, spec, false);
    CHECK(with.incumbent == Catch::Approx(without.incumbent).margin(1e-6));
}
