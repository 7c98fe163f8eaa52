#pragma once
// Fully-observed MDP solvers: infinite-horizon value iteration for the tail
// value function, and finite-horizon backward induction over arbitrary
// time-indexed rewards.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "pomdpml/model.hpp"

namespace pomdpml {

struct DiscountNotContractive : Error {
    using Error::Error;
};

/// Optimal values of the fully-observed approximation plus its greedy policy.
struct MdpValue {
    Vec values;                 // v(s)
    std::vector<std::size_t> greedy;  // argmax action per state, lowest index on ties
    double residual = 0.0;      // final sup-norm Bellman residual
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

inline double max_abs_reward(const PomdpInstance& m) {
    double mx = 0.0;
    for (double v : m.reward.data()) mx = std::max(mx, std::abs(v));
    return mx;
}

/// One Bellman sweep; returns sup-norm distance between input and output.
inline double bellman_sweep(const PomdpInstance& m, double gamma, const Vec& v, Vec& out,
                            std::vector<std::size_t>* greedy) {
    const std::size_t S = m.n_states(), A = m.n_actions();
    double diff = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_a = 0;
        for (std::size_t a = 0; a < A; ++a) {
            double q = m.reward(s, a);
            for (std::size_t s2 = 0; s2 < S; ++s2) q += gamma * m.transition(a, s, s2) * v[s2];
            if (q > best) {
                best = q;
                best_a = a;
            }
        }
        out[s] = best;
        if (greedy) (*greedy)[s] = best_a;
        diff = std::max(diff, std::abs(best - v[s]));
    }
    return diff;
}

}  // namespace detail

/**
 * Value iteration from v = 0 until the sup-norm Bellman residual drops below
 * `tol` (default 1e-10 * max(1, |r|_inf)). Requires gamma < 1. When the
 * iteration budget runs out the best iterate is returned with
 * converged = false and the achieved residual.
 */
inline MdpValue solve_mdp_infinite(const PomdpInstance& m, double tol = -1.0,
                                   std::size_t max_iter = 1000000) {
    const double gamma = m.discount;
    if (gamma >= 1.0)
        throw DiscountNotContractive("infinite-horizon solve needs discount < 1, got " +
                                     std::to_string(gamma));
    if (tol < 0.0) tol = 1e-10 * std::max(1.0, detail::max_abs_reward(m));

    MdpValue res;
    res.values.assign(m.n_states(), 0.0);
    res.greedy.assign(m.n_states(), 0);
    Vec next(m.n_states(), 0.0);
    for (std::size_t it = 0; it < max_iter; ++it) {
        const double diff = detail::bellman_sweep(m, gamma, res.values, next, &res.greedy);
        res.values.swap(next);
        res.iterations = it + 1;
        res.residual = diff;
        if (diff <= tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

/// Result of finite-horizon backward induction.
struct FiniteMdpValue {
    double value_at_belief = 0.0;       // sum_s b(s) v_0(s)
    std::vector<Vec> values;            // values[t][s] for t = 0..T
};

/**
 * Backward induction for time-indexed rewards r_t(s,a), t = 0..T:
 *   v_T(s) = max_a r_T(s,a),
 *   v_t(s) = max_a ( r_t(s,a) + sum_{s'} p(s'|s,a) v_{t+1}(s') ).
 * No implicit discounting; fold any discount into the rewards.
 */
inline FiniteMdpValue solve_mdp_finite(const PomdpInstance& m, const std::vector<Matrix>& rewards,
                                       const Belief& b) {
    const std::size_t S = m.n_states(), A = m.n_actions();
    const std::size_t T = rewards.size() - 1;
    FiniteMdpValue out;
    out.values.assign(T + 1, Vec(S, 0.0));
    for (std::size_t s = 0; s < S; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < A; ++a) best = std::max(best, rewards[T](s, a));
        out.values[T][s] = best;
    }
    for (std::size_t ti = T; ti-- > 0;) {
        for (std::size_t s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < A; ++a) {
                double q = rewards[ti](s, a);
                for (std::size_t s2 = 0; s2 < S; ++s2)
                    q += m.transition(a, s, s2) * out.values[ti + 1][s2];
                best = std::max(best, q);
            }
            out.values[ti][s] = best;
        }
    }
    for (std::size_t s = 0; s < S; ++s) out.value_at_belief += b[s] * out.values[0][s];
    return out;
}

}  // namespace pomdpml
