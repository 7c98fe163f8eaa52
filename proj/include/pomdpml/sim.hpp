#pragma once
// Seeded Monte Carlo evaluation of belief-feedback controllers, the bound
// suite that assembles the memoryless value / relaxation chain, and the gap
// metrics derived from it. Trajectory streams are counter-derived from
// (seed, index) so results do not depend on scheduling.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pomdpml/bnb.hpp"
#include "pomdpml/formulate.hpp"
#include "pomdpml/lp.hpp"
#include "pomdpml/mdp.hpp"
#include "pomdpml/model.hpp"
#include "pomdpml/smf.hpp"

namespace pomdpml {

struct UndefinedMetric : Error {
    using Error::Error;
};

/// splitmix64 step; used both as the stream derivation and the stream itself.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

/// Independent substream for trajectory k of a run seeded with `seed`.
inline SplitMix64 trajectory_stream(std::uint64_t seed, std::uint64_t k) {
    SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ull * (k + 1)));
    return SplitMix64(mix.next());
}

/// Inverse-CDF draw from an unnormalized nonnegative weight vector.
inline std::size_t sample_index(const double* w, std::size_t n, double u) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += w[i];
    double acc = 0.0;
    const double target = u * total;
    for (std::size_t i = 0; i < n; ++i) {
        acc += w[i];
        if (target < acc) return i;
    }
    for (std::size_t i = n; i-- > 0;)
        if (w[i] > 0.0) return i;
    return 0;
}

namespace detail {

/// Pairwise summation: deterministic and insensitive to evaluation order.
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace detail

struct SimConfig {
    std::size_t n_sims = 1000;
    std::size_t steps = 100;
    std::uint64_t seed = 0;
    std::optional<double> discount;  // overrides the instance discount
};

struct EvalReport {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    double truncation_bias_bound = 0.0;
    double per_action_seconds = 0.0;   // mean wall time per controller call
    double cached_fraction = 0.0;      // controller decisions served from cache
    std::size_t unproven_solves = 0;
    std::size_t n_sims = 0, steps = 0;
    std::uint64_t seed = 0;
};

/**
 * Runs config.n_sims trajectories of config.steps steps. For trajectory k:
 * draw s0 from the initial belief using substream (seed, k), then repeatedly
 * ask the controller for an action at the current belief, accrue the
 * discounted reward, advance the hidden state, emit an observation, and do
 * the Bayes update. Controller errors are rethrown with trajectory context.
 */
inline EvalReport simulate_controller(const PomdpInstance& m, Controller& controller,
                                      const SimConfig& config) {
    if (config.n_sims < 1 || config.steps < 1) throw Error("simulation needs n_sims, steps >= 1");
    const double gamma = config.discount.value_or(m.discount);
    const std::size_t S = m.n_states(), O = m.n_observations();

    const ControllerStats before = controller.stats();
    Vec totals(config.n_sims, 0.0);
    double action_seconds = 0.0;
    std::size_t action_calls = 0;

    for (std::size_t k = 0; k < config.n_sims; ++k) {
        SplitMix64 rng = trajectory_stream(config.seed, k);
        std::size_t s = sample_index(m.initial_belief.probs.data(), S, rng.uniform());
        Belief belief = m.initial_belief;
        double total = 0.0;
        double disc = 1.0;
        for (std::size_t t = 0; t < config.steps; ++t) {
            std::size_t a;
            try {
                const auto t0 = std::chrono::steady_clock::now();
                a = controller.act(belief);
                action_seconds +=
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                ++action_calls;
            } catch (const Error& e) {
                throw Error("controller failed at trajectory " + std::to_string(k) + ", step " +
                            std::to_string(t) + ": " + e.what());
            }
            total += disc * m.reward(s, a);
            disc *= gamma;
            Vec row(S);
            for (std::size_t s2 = 0; s2 < S; ++s2) row[s2] = m.transition(a, s, s2);
            s = sample_index(row.data(), S, rng.uniform());
            Vec erow(O);
            for (std::size_t o = 0; o < O; ++o) erow[o] = m.emission(s, o);
            const std::size_t obs = sample_index(erow.data(), O, rng.uniform());
            belief = belief_update(m, belief, a, obs);
        }
        totals[k] = total;
    }

    EvalReport rep;
    rep.n_sims = config.n_sims;
    rep.steps = config.steps;
    rep.seed = config.seed;
    bool constant = true;
    for (double v : totals)
        if (v != totals[0]) {
            constant = false;
            break;
        }
    if (constant) {
        rep.mean = totals[0];
        rep.stderr_of_mean = 0.0;
    } else {
        rep.mean =
            detail::pairwise_sum(totals.data(), totals.size()) / static_cast<double>(config.n_sims);
        Vec sq(config.n_sims);
        for (std::size_t k = 0; k < config.n_sims; ++k) {
            const double d = totals[k] - rep.mean;
            sq[k] = d * d;
        }
        const double var =
            detail::pairwise_sum(sq.data(), sq.size()) / static_cast<double>(config.n_sims - 1);
        rep.stderr_of_mean = std::sqrt(var / static_cast<double>(config.n_sims));
    }
    double rmax = 0.0;
    for (double v : m.reward.data()) rmax = std::max(rmax, std::abs(v));
    rep.truncation_bias_bound = gamma < 1.0
                                    ? std::pow(gamma, static_cast<double>(config.steps)) * rmax /
                                          (1.0 - gamma)
                                    : std::numeric_limits<double>::infinity();
    rep.per_action_seconds = action_calls ? action_seconds / static_cast<double>(action_calls) : 0.0;
    const ControllerStats after = controller.stats();
    const std::size_t decisions = after.decisions - before.decisions;
    rep.cached_fraction =
        decisions ? static_cast<double>(after.cache_hits - before.cache_hits) / decisions : 0.0;
    rep.unproven_solves = after.unproven_solves - before.unproven_solves;
    return rep;
}

struct BoundsReport {
    std::vector<int> horizons;
    Vec w_ml;   // memoryless optimum per horizon (plain rewards)
    Vec z_rc;   // relaxation with the extended rows
    Vec z_r;    // relaxation without them
    std::vector<MilpStatus> milp_status;

    int t_ub = 0;
    double z_tilde_rc_tub = 0.0;  // tilde relaxation with cuts at t_ub
    double z_tilde_r0 = 0.0;      // tilde relaxation without cuts at horizon 0
    Vec z_tilde_r_grid;           // per horizon, when requested
    Vec z_tilde_rc_grid;

    std::vector<std::string> defects;  // ordering violations beyond 1e-6
    bool ok() const { return defects.empty(); }
};

struct BoundSuiteOptions {
    std::optional<double> discount;  // overrides the instance discount
    bool tilde = true;               // compute the tilde bounds
    bool tilde_grid = false;         // also the tilde values on the horizon grid
    MilpParams milp;
    LpParams lp;
};

/**
 * For each horizon T in `horizons`, computes the memoryless MILP optimum and
 * both linear relaxations with plain rewards, plus the tilde-reward bounds
 * z~_Rc^{t_ub} and z~_R^0. Ordering violations beyond 1e-6 are recorded as
 * defects rather than silently accepted.
 */
inline BoundsReport compute_bound_suite(const PomdpInstance& instance,
                                        const std::vector<int>& horizons, int t_ub,
                                        const BoundSuiteOptions& options = {}) {
    PomdpInstance m = instance;
    if (options.discount) m.discount = *options.discount;

    BoundsReport rep;
    rep.horizons = horizons;
    rep.t_ub = t_ub;

    for (int T : horizons) {
        const RewardSpec plain = RewardSpec::plain(m, T);
        const LpModel relax = build_memoryless_model(m, plain, {.cuts = false});
        const LpModel relax_cuts = build_memoryless_model(m, plain, {.cuts = true});
        const LpModel milp_model = build_memoryless_model(m, plain, {.cuts = true, .integral = true});

        const LpSolution zr = solve_lp(relax, options.lp);
        const LpSolution zrc = solve_lp(relax_cuts, options.lp);
        if (zr.status != LpStatus::Optimal || zrc.status != LpStatus::Optimal)
            throw NumericalBreakdown("relaxation at horizon " + std::to_string(T) + " ended " +
                                     to_string(zr.status));
        const MilpResult ml = solve_milp(milp_model, m, plain, options.milp);

        rep.z_r.push_back(zr.objective);
        rep.z_rc.push_back(zrc.objective);
        rep.w_ml.push_back(ml.incumbent);
        rep.milp_status.push_back(ml.status);

        if (ml.incumbent > zrc.objective + 1e-6)
            rep.defects.push_back("w_ml > z_Rc at T=" + std::to_string(T));
        if (zrc.objective > zr.objective + 1e-6)
            rep.defects.push_back("z_Rc > z_R at T=" + std::to_string(T));
    }

    if (options.tilde) {
        if (m.discount >= 1.0)
            throw DiscountNotContractive("tilde bounds need discount < 1");
        const MdpValue tail = solve_mdp_infinite(m);
        {
            const RewardSpec tilde0 = RewardSpec::tilde(m, 0, tail.values, m.discount);
            const LpModel relax0 = build_memoryless_model(m, tilde0, {.cuts = false});
            rep.z_tilde_r0 = solve_lp(relax0, options.lp).objective;
        }
        {
            const RewardSpec tilde = RewardSpec::tilde(m, t_ub, tail.values, m.discount);
            const LpModel relax_cuts = build_memoryless_model(m, tilde, {.cuts = true});
            const LpSolution sol = solve_lp(relax_cuts, options.lp);
            if (sol.status != LpStatus::Optimal)
                throw NumericalBreakdown("tilde relaxation at t_ub ended " + std::string(to_string(sol.status)));
            rep.z_tilde_rc_tub = sol.objective;
        }
        if (rep.z_tilde_rc_tub > rep.z_tilde_r0 + 1e-6)
            rep.defects.push_back("z~_Rc^{t_ub} > z~_R^0");

        if (options.tilde_grid) {
            double prev_rc = std::numeric_limits<double>::infinity();
            for (int T : horizons) {
                const RewardSpec tilde = RewardSpec::tilde(m, T, tail.values, m.discount);
                const LpModel relax = build_memoryless_model(m, tilde, {.cuts = false});
                const LpModel relax_cuts = build_memoryless_model(m, tilde, {.cuts = true});
                const double zr = solve_lp(relax, options.lp).objective;
                const double zrc = solve_lp(relax_cuts, options.lp).objective;
                rep.z_tilde_r_grid.push_back(zr);
                rep.z_tilde_rc_grid.push_back(zrc);
                if (std::abs(zr - rep.z_tilde_r0) > 1e-6)
                    rep.defects.push_back("z~_R varies with T at T=" + std::to_string(T));
                if (zrc > prev_rc + 1e-6)
                    rep.defects.push_back("z~_Rc increases at T=" + std::to_string(T));
                prev_rc = zrc;
            }
        }
    }
    return rep;
}

struct GapMetric {
    bool defined = false;
    double raw = 0.0;  // the ratio itself, not a percentage

    double percent() const { return 100.0 * raw; }
    /// Percentage rounded to one decimal, the table convention.
    double percent_1dp() const { return std::round(percent() * 10.0) / 10.0; }
};

struct GapReport {
    // (z_Rc^T - w_ml^T) / z_Rc^T per horizon of the bounds report
    std::vector<GapMetric> memoryless_gap;
    // (z~_Rc^{t_ub} - v) / z~_Rc^{t_ub} for a simulated controller value v
    GapMetric controller_gap;
    // (z~_R^0 - z~_Rc^{t_ub}) / z~_R^0
    GapMetric upper_bound_improvement;
};

/// Builds the gap metrics; zero denominators leave a metric undefined.
inline GapReport compute_gaps(const BoundsReport& bounds,
                              std::optional<double> controller_value = std::nullopt) {
    GapReport rep;
    for (std::size_t i = 0; i < bounds.horizons.size(); ++i) {
        GapMetric g;
        if (bounds.z_rc[i] != 0.0) {
            g.defined = true;
            g.raw = (bounds.z_rc[i] - bounds.w_ml[i]) / bounds.z_rc[i];
        }
        rep.memoryless_gap.push_back(g);
    }
    if (controller_value && bounds.z_tilde_rc_tub != 0.0) {
        rep.controller_gap.defined = true;
        rep.controller_gap.raw =
            (bounds.z_tilde_rc_tub - *controller_value) / bounds.z_tilde_rc_tub;
    }
    if (bounds.z_tilde_r0 != 0.0) {
        rep.upper_bound_improvement.defined = true;
        rep.upper_bound_improvement.raw =
            (bounds.z_tilde_r0 - bounds.z_tilde_rc_tub) / bounds.z_tilde_r0;
    }
    return rep;
}

}  // namespace pomdpml
