#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "pomdpml/mdp.hpp"
#include "pomdpml/rewards.hpp"

using namespace pomdpml;
using testutil::load_bench;

TEST_CASE("geometric series: one state, unit reward, gamma 0.9") {
    const auto m = testutil::degenerate_instance();
    const auto v = solve_mdp_infinite(m);
    REQUIRE(v.converged);
    CHECK(v.values[0] == Catch::Approx(10.0).margin(1e-8));
    CHECK(v.residual <= 1e-10);
}

TEST_CASE("zero rewards solve to zero") {
    auto m = testutil::random_instance(17);
    for (double& r : m.reward.data()) r = 0.0;
    const auto v = solve_mdp_infinite(m);
    for (double x : v.values) CHECK(x == 0.0);
}

TEST_CASE("value iteration matches the policy-iteration oracle") {
    for (const char* name : {"tiger", "paint", "web-mall", "ejs2"}) {
        auto m = load_bench(name);
        const auto vi = solve_mdp_infinite(m);
        const auto pi = testutil::policy_iteration_values(m);
        REQUIRE(vi.converged);
        for (std::size_t s = 0; s < m.n_states(); ++s) {
            INFO(name << " state " << s);
            CHECK(vi.values[s] == Catch::Approx(pi[s]).margin(1e-8));
        }
    }
    // frozen: the tiger tail value is exactly 10 / (1 - 0.95)
    const auto tiger = solve_mdp_infinite(load_bench("tiger"));
    CHECK(tiger.values[0] == Catch::Approx(200.0).margin(1e-7));
    CHECK(tiger.values[1] == Catch::Approx(200.0).margin(1e-7));
}

TEST_CASE("greedy actions attain the Bellman maximum") {
    const auto m = load_bench("ejs3");
    const auto v = solve_mdp_infinite(m);
    // the steady action dominates in both states
    CHECK(v.greedy[0] == 0);
    CHECK(v.greedy[1] == 0);
    CHECK(v.values[0] == Catch::Approx(20.0).margin(1e-7));
}

TEST_CASE("discount at or above one is rejected") {
    auto m = testutil::degenerate_instance();
    m.discount = 1.0;
    CHECK_THROWS_AS(solve_mdp_infinite(m), DiscountNotContractive);
}

TEST_CASE("iteration limit returns the best iterate unconverged") {
    const auto m = testutil::degenerate_instance();
    const auto v = solve_mdp_infinite(m, -1.0, 3);
    CHECK_FALSE(v.converged);
    CHECK(v.iterations == 3);
    CHECK(v.residual > 1e-10);
}

TEST_CASE("finite horizon: single stage maximizes per state") {
    const auto m = load_bench("web-mall");
    const auto spec = RewardSpec::plain(m, 0);
    const auto fin = solve_mdp_finite(m, spec.table, m.initial_belief);
    double expect = 0.0;
    for (std::size_t s = 0; s < m.n_states(); ++s) {
        double best = -1e300;
        for (std::size_t a = 0; a < m.n_actions(); ++a) best = std::max(best, m.reward(s, a));
        expect += m.initial_belief[s] * best;
    }
    CHECK(fin.value_at_belief == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("constant rewards give (T+1) c from any belief") {
    auto m = testutil::random_instance(23);
    for (double& r : m.reward.data()) r = 0.7;
    for (int T : {0, 1, 4}) {
        const auto spec = RewardSpec::plain(m, T);
        const auto fin = solve_mdp_finite(m, spec.table, m.initial_belief);
        CHECK(fin.value_at_belief == Catch::Approx(0.7 * (T + 1)).margin(1e-10));
    }
}

TEST_CASE("finite-horizon values are nondecreasing in T for nonnegative rewards") {
    auto m = testutil::random_instance(31);
    for (double& r : m.reward.data()) r = std::abs(r);
    double prev = -1.0;
    for (int T = 0; T <= 5; ++T) {
        const auto spec = RewardSpec::plain(m, T);
        const double v = solve_mdp_finite(m, spec.table, m.initial_belief).value_at_belief;
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("tail-closed rewards make the finite solve exactly the tail value") {
    // backward induction over the tail-closed table telescopes to b . v
    for (const char* name : {"tiger", "paint", "ejs1", "web-mall"}) {
        const auto m = load_bench(name);
        const auto tail = solve_mdp_infinite(m);
        double bv = 0.0;
        for (std::size_t s = 0; s < m.n_states(); ++s)
            bv += m.initial_belief[s] * tail.values[s];
        for (int T : {0, 2, 5}) {
            const auto spec = RewardSpec::tilde(m, T, tail.values, m.discount);
            const auto fin = solve_mdp_finite(m, spec.table, m.initial_belief);
            INFO(name << " T=" << T);
            CHECK(fin.value_at_belief == Catch::Approx(bv).margin(1e-7));
        }
    }
}

TEST_CASE("discounted rewards without the terminal stage approach the tail value") {
    const auto m = load_bench("ejs2");
    const auto tail = solve_mdp_infinite(m);
    double bv = 0.0;
    for (std::size_t s = 0; s < m.n_states(); ++s) bv += m.initial_belief[s] * tail.values[s];
    double rmax = 0.0;
    for (double v : m.reward.data()) rmax = std::max(rmax, std::abs(v));
    for (int T : {2, 6, 10}) {
        std::vector<Matrix> table;
        for (int t = 0; t <= T; ++t) {
            Matrix rt = m.reward;
            for (double& v : rt.data()) v *= std::pow(m.discount, t);
            table.push_back(std::move(rt));
        }
        const double v = solve_mdp_finite(m, table, m.initial_belief).value_at_belief;
        const double slack = std::pow(m.discount, T + 1) * 2.0 * rmax / (1.0 - m.discount);
        CHECK(std::abs(v - bv) <= slack + 1e-9);
    }
}
