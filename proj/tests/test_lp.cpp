#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "model_check.hpp"
#include "pomdpml/formulate.hpp"
#include "pomdpml/lp.hpp"
#include "pomdpml/mdp.hpp"

using namespace pomdpml;
using testutil::load_bench;

namespace {

LpModel tiny_model() {
    LpModel m;
    m.add_col("x", 0.0, kInf);
    m.objective[0] = 1.0;
    auto& row = m.add_row("cap", RowSense::LessEqual, 3.0);
    row.coeffs = {{0, 1.0}};
    return m;
}

}  // namespace

TEST_CASE("maximize x subject to x <= 3") {
    const auto sol = solve_lp(tiny_model());
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == Catch::Approx(3.0).margin(1e-9));
    CHECK(sol.x[0] == Catch::Approx(3.0).margin(1e-9));
    CHECK(sol.feas_residual <= 1e-9);
}

TEST_CASE("contradictory rows are infeasible") {
    LpModel m;
    m.add_col("x", 0.0, kInf);
    m.objective[0] = 1.0;
    m.add_row("ge", RowSense::GreaterEqual, 1.0).coeffs = {{0, 1.0}};
    m.add_row("le", RowSense::LessEqual, 0.0).coeffs = {{0, 1.0}};
    CHECK(solve_lp(m).status == LpStatus::Infeasible);
}

TEST_CASE("a free direction is unbounded") {
    LpModel m;
    m.add_col("x", 0.0, kInf);
    m.objective[0] = 1.0;
    m.add_row("ge", RowSense::GreaterEqual, 1.0).coeffs = {{0, 1.0}};
    CHECK(solve_lp(m).status == LpStatus::Unbounded);
}

TEST_CASE("equality rows route through phase one") {
    LpModel m;
    m.add_col("x", 0.0, kInf);
    m.add_col("y", 0.0, kInf);
    m.objective[0] = 2.0;
    m.objective[1] = 1.0;
    m.add_row("sum", RowSense::Equal, 4.0).coeffs = {{0, 1.0}, {1, 1.0}};
    m.add_row("cap", RowSense::LessEqual, 3.0).coeffs = {{0, 1.0}};
    const auto sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == Catch::Approx(7.0).margin(1e-9));
    CHECK(sol.x[0] == Catch::Approx(3.0).margin(1e-9));
    CHECK(sol.x[1] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("relaxation value equals finite-horizon backward induction") {
    for (const char* name : {"tiger", "paint", "1d", "web-mall", "ejs1", "ejs2"}) {
        const auto m = load_bench(name);
        for (int T : {0, 1, 2, 3}) {
            const auto spec = RewardSpec::plain(m, T);
            const auto model = build_memoryless_model(m, spec);
            const auto sol = solve_lp(model);
            REQUIRE(sol.status == LpStatus::Optimal);
            const double dp = solve_mdp_finite(m, spec.table, m.initial_belief).value_at_belief;
            INFO(name << " T=" << T);
            CHECK(sol.objective == Catch::Approx(dp).margin(1e-6));
        }
    }
}

TEST_CASE("relaxation value equals backward induction on random instances") {
    for (std::uint64_t seed = 60; seed < 66; ++seed) {
        const auto m = testutil::random_instance(seed);
        const auto spec = RewardSpec::plain(m, 3);
        const auto sol = solve_lp(build_memoryless_model(m, spec));
        REQUIRE(sol.status == LpStatus::Optimal);
        const double dp = solve_mdp_finite(m, spec.table, m.initial_belief).value_at_belief;
        INFO("seed " << seed);
        CHECK(sol.objective == Catch::Approx(dp).margin(1e-7));
    }
}

TEST_CASE("a backward-induction point completes to a feasible relaxation point") {
    // mu_soa := p(o|s) mu_sa and delta := action marginals satisfy every row
    const auto m = load_bench("tiger");
    const auto spec = RewardSpec::plain(m, 2);
    const auto model = build_memoryless_model(m, spec);
    const VariableIndex& ix = model.index;
    // greedy per-state backward induction moments
    const auto fin = solve_mdp_finite(m, spec.table, m.initial_belief);
    Vec x(static_cast<std::size_t>(ix.n_cols()), 0.0);
    Vec mus = m.initial_belief.probs;
    for (int t = 0; t <= 2; ++t) {
        for (int s = 0; s < ix.S; ++s) x[ix.mu_s(t, s)] = mus[s];
        // per-state greedy split of the mass
        Matrix musa(ix.S, ix.A, 0.0);
        for (int s = 0; s < ix.S; ++s) {
            double best = -1e300;
            int best_a = 0;
            for (int a = 0; a < ix.A; ++a) {
                double q = spec.table[t](s, a);
                if (t < 2)
                    for (int s2 = 0; s2 < ix.S; ++s2)
                        q += m.transition(a, s, s2) * fin.values[t + 1][s2];
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            musa(s, best_a) = mus[s];
        }
        Vec delta(ix.A, 0.0);
        for (int s = 0; s < ix.S; ++s)
            for (int a = 0; a < ix.A; ++a) delta[a] += musa(s, a);
        for (int s = 0; s < ix.S; ++s)
            for (int a = 0; a < ix.A; ++a) {
                x[ix.mu_sa(t, s, a)] = musa(s, a);
                for (int o = 0; o < ix.O; ++o)
                    x[ix.mu_soa(t, s, o, a)] = m.emission(s, o) * musa(s, a);
            }
        for (int o = 0; o < ix.O; ++o)
            for (int a = 0; a < ix.A; ++a) x[ix.delta(t, o, a)] = delta[a];
        Vec next(ix.S, 0.0);
        for (int sp = 0; sp < ix.S; ++sp)
            for (int ap = 0; ap < ix.A; ++ap)
                for (int s = 0; s < ix.S; ++s)
                    next[s] += m.transition(ap, sp, s) * musa(sp, ap);
        mus = next;
    }
    for (int s = 0; s < ix.S; ++s) x[ix.mu_s(3, s)] = mus[s];
    CHECK(testutil::max_row_violation(model, x) <= 1e-9);
    CHECK(testutil::objective_at(model, x) == Catch::Approx(fin.value_at_belief).margin(1e-9));
}

TEST_CASE("extended rows never help above the plain relaxation") {
    for (const char* name : {"tiger", "paint", "web-mall"}) {
        const auto m = load_bench(name);
        for (int T : {1, 2}) {
            const auto spec = RewardSpec::plain(m, T);
            const double zr = solve_lp(build_memoryless_model(m, spec)).objective;
            const double zrc =
                solve_lp(build_memoryless_model(m, spec, {.cuts = true})).objective;
            INFO(name << " T=" << T);
            CHECK(zrc <= zr + 1e-8);
        }
    }
}

TEST_CASE("frozen relaxation values for tiger") {
    const auto m = load_bench("tiger");
    const auto spec = RewardSpec::plain(m, 1);
    CHECK(solve_lp(build_memoryless_model(m, spec)).objective == Catch::Approx(20.0).margin(1e-6));
    CHECK(solve_lp(build_memoryless_model(m, spec, {.cuts = true})).objective ==
          Catch::Approx(9.0).margin(1e-6));
}

TEST_CASE("objective is invariant under row permutation") {
    const auto m = load_bench("paint");
    const auto spec = RewardSpec::plain(m, 2);
    auto model = build_memoryless_model(m, spec, {.cuts = true});
    const double ref = solve_lp(model).objective;
    std::mt19937_64 rng(2024);
    std::shuffle(model.rows.begin(), model.rows.end(), rng);
    const double shuffled = solve_lp(model).objective;
    CHECK(shuffled == Catch::Approx(ref).epsilon(1e-8));
}

TEST_CASE("identical inputs give identical solutions") {
    const auto m = load_bench("ejs1");
    const auto model = build_memoryless_model(m, RewardSpec::plain(m, 2), {.cuts = true});
    const auto a = solve_lp(model);
    const auto b = solve_lp(model);
    CHECK(a.objective == b.objective);
    CHECK(a.iterations == b.iterations);
    CHECK(a.x == b.x);
}

TEST_CASE("tail-closed relaxation without cuts is constant in the horizon") {
    const auto m = load_bench("tiger");
    const auto tail = solve_mdp_infinite(m);
    double z0 = 0.0;
    for (int T : {0, 1, 2}) {
        const auto spec = RewardSpec::tilde(m, T, tail.values, m.discount);
        const double z = solve_lp(build_memoryless_model(m, spec)).objective;
        if (T == 0)
            z0 = z;
        else
            CHECK(std::abs(z - z0) <= 1e-6);
    }
    CHECK(z0 == Catch::Approx(200.0).margin(1e-5));
}

TEST_CASE("tail-closed relaxation with cuts shrinks as the horizon grows") {
    const auto m = load_bench("tiger");
    const auto tail = solve_mdp_infinite(m);
    double prev = kInf;
    for (int T : {0, 1, 2, 3}) {
        const auto spec = RewardSpec::tilde(m, T, tail.values, m.discount);
        const double z =
            solve_lp(build_memoryless_model(m, spec, {.cuts = true})).objective;
        CHECK(z <= prev + 1e-6);
        prev = z;
    }
}

TEST_CASE("a fractional relaxation vertex violates the bilinear constraints") {
    const auto m = load_bench("tiger");
    const auto spec = RewardSpec::plain(m, 2);
    const auto model = build_memoryless_model(m, spec);
    const auto sol = solve_lp(model);
    REQUIRE(sol.status == LpStatus::Optimal);
    const auto mom = extract_moments(model, sol.x);
    const auto rep = check_nlp_feasibility(m, mom, mom.policy);
    CHECK(rep.bilinear > 1e-6);
}

TEST_CASE("warm bases are used when valid and ignored otherwise") {
    const auto m = load_bench("ejs2");
    const auto model = build_memoryless_model(m, RewardSpec::plain(m, 2));
    SimplexSolver first(model);
    const auto cold = first.solve();
    REQUIRE(cold.status == LpStatus::Optimal);
    const LpBasis basis = first.basis_snapshot();
    SimplexSolver second(model);
    const auto warm = second.solve(&basis);
    CHECK(warm.status == LpStatus::Optimal);
    CHECK(warm.objective == Catch::Approx(cold.objective).margin(1e-9));
    CHECK(warm.iterations <= cold.iterations);
    // nonsense basis: silently ignored
    LpBasis junk(static_cast<std::size_t>(model.n_cols()) + model.n_rows(), VarStatus::Basic);
    SimplexSolver third(model);
    const auto fallback = third.solve(&junk);
    CHECK(fallback.objective == Catch::Approx(cold.objective).margin(1e-9));
}

TEST_CASE("iteration limits surface as a status") {
    const auto m = load_bench("paint");
    const auto model = build_memoryless_model(m, RewardSpec::plain(m, 3), {.cuts = true});
    LpParams params;
    params.max_iters = 3;
    CHECK(solve_lp(model, params).status == LpStatus::IterationLimit);
}

TEST_CASE("bound fixes narrow the feasible set") {
    const auto m = load_bench("tiger");
    const auto spec = RewardSpec::plain(m, 1);
    const auto model = build_memoryless_model(m, spec);
    // force the stage-0 policy onto open-left
    std::vector<BoundFix> fixes = {{model.index.delta(0, 0, 1), 1.0, 1.0},
                                   {model.index.delta(0, 0, 0), 0.0, 0.0},
                                   {model.index.delta(0, 0, 2), 0.0, 0.0}};
    const auto free_sol = solve_lp(model);
    const auto fixed_sol = solve_lp(model, {}, &fixes);
    REQUIRE(fixed_sol.status == LpStatus::Optimal);
    CHECK(fixed_sol.objective <= free_sol.objective + 1e-9);
    CHECK(fixed_sol.x[model.index.delta(0, 0, 1)] == Catch::Approx(1.0).margin(1e-9));
}
