#pragma once
// Time-indexed reward tables for the finite-horizon problems: either the
// plain stationary rewards, or the discounted rewards with the tail value
// folded into the terminal stage.

#include <cmath>
#include <cstddef>
#include <vector>

#include "pomdpml/model.hpp"

namespace pomdpml {

struct HorizonNegative : Error {
    using Error::Error;
};

/**
 * Realized reward table r_t(s,a) for t = 0..T.
 *
 * Plain:  r_t = r for every stage (undiscounted finite horizon).
 * Tilde:  r_t = gamma^t r for t < T and
 *         r_T = gamma^T r + gamma^{T+1} sum_{s'} p(s'|s,a) v_tail(s'),
 *         so a finite-horizon solve scores exactly the discounted
 *         infinite-horizon objective with v_tail closing the tail.
 */
struct RewardSpec {
    enum class Kind { Plain, Tilde };

    Kind kind = Kind::Plain;
    int horizon = 0;
    std::vector<Matrix> table;  // table[t](s, a)

    static RewardSpec plain(const PomdpInstance& m, int T) {
        if (T < 0) throw HorizonNegative("horizon must be >= 0, got " + std::to_string(T));
        RewardSpec spec;
        spec.kind = Kind::Plain;
        spec.horizon = T;
        spec.table.assign(static_cast<std::size_t>(T) + 1, m.reward);
        return spec;
    }

    static RewardSpec tilde(const PomdpInstance& m, int T, const Vec& v_tail, double gamma) {
        if (T < 0) throw HorizonNegative("horizon must be >= 0, got " + std::to_string(T));
        const std::size_t S = m.n_states(), A = m.n_actions();
        RewardSpec spec;
        spec.kind = Kind::Tilde;
        spec.horizon = T;
        spec.table.reserve(static_cast<std::size_t>(T) + 1);
        for (int t = 0; t <= T; ++t) {
            const double g = std::pow(gamma, t);
            Matrix rt(S, A);
            for (std::size_t s = 0; s < S; ++s)
                for (std::size_t a = 0; a < A; ++a) rt(s, a) = g * m.reward(s, a);
            if (t == T) {
                const double gt = std::pow(gamma, T + 1);
                for (std::size_t s = 0; s < S; ++s)
                    for (std::size_t a = 0; a < A; ++a) {
                        double tail = 0.0;
                        for (std::size_t s2 = 0; s2 < S; ++s2)
                            tail += m.transition(a, s, s2) * v_tail[s2];
                        rt(s, a) += gt * tail;
                    }
            }
            spec.table.push_back(std::move(rt));
        }
        return spec;
    }
};

}  // namespace pomdpml
