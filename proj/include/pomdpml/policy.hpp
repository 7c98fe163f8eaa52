#pragma once
// Memoryless policies, their exact evaluation through the forward moment
// recursion, and the brute-force enumeration oracle over deterministic
// policies.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pomdpml/model.hpp"
#include "pomdpml/rewards.hpp"

namespace pomdpml {

struct HorizonMismatch : Error {
    using Error::Error;
};

struct SearchSpaceExceedsGuard : Error {
    std::uint64_t count;
    SearchSpaceExceedsGuard(std::uint64_t count_, std::uint64_t guard)
        : Error("deterministic policy count " + std::to_string(count_) + " exceeds guard " +
                std::to_string(guard)),
          count(count_) {}
};

/**
 * A stochastic decision rule delta^t(a|o) per stage t = 0..T. The stage-0
 * rule is observation-independent: all rows of delta[0] are identical.
 */
struct MemorylessPolicy {
    std::vector<Matrix> delta;  // delta[t](o, a)
    bool deterministic = false;

    int horizon() const { return static_cast<int>(delta.size()) - 1; }
    std::size_t n_observations() const { return delta.empty() ? 0 : delta[0].rows(); }
    std::size_t n_actions() const { return delta.empty() ? 0 : delta[0].cols(); }

    /// Action with the largest probability at (t,o); lowest index on ties.
    std::size_t mode_action(std::size_t t, std::size_t o) const {
        std::size_t best = 0;
        for (std::size_t a = 1; a < n_actions(); ++a)
            if (delta[t](o, a) > delta[t](o, best)) best = a;
        return best;
    }

    /// Builds a deterministic policy from a stage-0 action and per-stage
    /// observation-to-action maps for t = 1..T.
    static MemorylessPolicy make_deterministic(
        std::size_t n_obs, std::size_t n_actions, std::size_t a0,
        const std::vector<std::vector<std::size_t>>& tail) {
        MemorylessPolicy p;
        p.deterministic = true;
        Matrix d0(n_obs, n_actions, 0.0);
        for (std::size_t o = 0; o < n_obs; ++o) d0(o, a0) = 1.0;
        p.delta.push_back(std::move(d0));
        for (const auto& stage : tail) {
            Matrix dt(n_obs, n_actions, 0.0);
            for (std::size_t o = 0; o < n_obs; ++o) dt(o, stage[o]) = 1.0;
            p.delta.push_back(std::move(dt));
        }
        return p;
    }

    /// Checks the simplex rows, the stage-0 tie and the deterministic flag.
    ValidationReport validate() const {
        ValidationReport rep;
        for (std::size_t t = 0; t < delta.size(); ++t)
            for (std::size_t o = 0; o < n_observations(); ++o) {
                double sum = 0.0;
                for (std::size_t a = 0; a < n_actions(); ++a) {
                    const double v = delta[t](o, a);
                    if (v < -kRowSumTol)
                        rep.issues.push_back("delta negative at t=" + std::to_string(t));
                    if (deterministic && std::abs(v) > kRowSumTol && std::abs(v - 1.0) > kRowSumTol)
                        rep.issues.push_back("deterministic flag but fractional entry at t=" +
                                             std::to_string(t));
                    sum += v;
                }
                if (std::abs(sum - 1.0) > kRowSumTol)
                    rep.issues.push_back("delta row (t=" + std::to_string(t) +
                                         ",o=" + std::to_string(o) + ") sums to " + std::to_string(sum));
            }
        if (!delta.empty())
            for (std::size_t o = 1; o < n_observations(); ++o)
                for (std::size_t a = 0; a < n_actions(); ++a)
                    if (std::abs(delta[0](o, a) - delta[0](0, a)) > kRowSumTol)
                        rep.issues.push_back("stage-0 rule depends on the observation");
        return rep;
    }
};

/**
 * Moment vectors of the state/observation/action process induced by a
 * policy: mu_s^t (t = 0..T+1), mu_sa^t and mu_soa^t (t = 0..T), and
 * optionally the extended one-step-memory moments mu_{s'a'soa}^t
 * (t = 1..T, flattened (s',a',s,o,a)).
 */
struct MomentSolution {
    int horizon = 0;
    std::vector<Vec> mu_s;        // [t][s], t = 0..T+1
    std::vector<Matrix> mu_sa;    // [t](s,a), t = 0..T
    std::vector<Tensor3> mu_soa;  // [t](s,o,a), t = 0..T
    std::vector<Vec> extended;    // [t-1][((sp*A+ap)*S+s)*O*A + o*A + a], t = 1..T
    MemorylessPolicy policy;
    bool policy_deterministic_flag = false;

    bool has_extended() const { return !extended.empty(); }

    /// Entries nonnegative (within 1e-9) and sum_s mu_s^0 == 1 within 1e-9.
    bool feasible_as_moments() const {
        constexpr double tol = 1e-9;
        double sum0 = 0.0;
        for (double v : mu_s.empty() ? Vec{} : mu_s[0]) sum0 += v;
        if (std::abs(sum0 - 1.0) > tol) return false;
        for (const auto& v : mu_s)
            for (double x : v)
                if (x < -tol) return false;
        for (const auto& mat : mu_sa)
            for (double x : mat.data())
                if (x < -tol) return false;
        for (const auto& t : mu_soa)
            for (double x : t.data())
                if (x < -tol) return false;
        return true;
    }
};

struct PolicyValue {
    double value = 0.0;
    MomentSolution moments;
};

/**
 * Exact policy value by the forward moment recursion:
 *   mu_s^0 = b, mu_soa^t = delta^t(a|o) p(o|s) mu_s^t,
 *   mu_sa^t = sum_o mu_soa^t, mu_s^{t+1} = sum_{s',a'} p(s|s',a') mu_{s'a'}^t,
 *   value = sum_t sum_{s,a} r_t(s,a) mu_sa^t.
 * With `with_extended` the one-step-memory moments are also materialized.
 */
inline PolicyValue evaluate_exact(const PomdpInstance& m, const MemorylessPolicy& policy,
                                  const RewardSpec& rewards, bool with_extended = false) {
    if (policy.horizon() != rewards.horizon)
        throw HorizonMismatch("policy horizon " + std::to_string(policy.horizon()) +
                              " vs reward horizon " + std::to_string(rewards.horizon));
    const std::size_t S = m.n_states(), A = m.n_actions(), O = m.n_observations();
    const int T = rewards.horizon;

    PolicyValue out;
    out.moments.horizon = T;
    out.moments.policy = policy;
    out.moments.policy_deterministic_flag = policy.deterministic;

    Vec mus(m.initial_belief.probs);
    for (int t = 0; t <= T; ++t) {
        out.moments.mu_s.push_back(mus);
        Tensor3 musoa(S, O, A, 0.0);
        Matrix musa(S, A, 0.0);
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t o = 0; o < O; ++o) {
                const double w = m.emission(s, o) * mus[s];
                if (w == 0.0) continue;
                for (std::size_t a = 0; a < A; ++a) {
                    const double v = policy.delta[t](o, a) * w;
                    musoa(s, o, a) = v;
                    musa(s, a) += v;
                }
            }
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) out.value += rewards.table[t](s, a) * musa(s, a);
        if (with_extended && t >= 1) {
            const Matrix& prev = out.moments.mu_sa[t - 1];
            Vec ext(S * A * S * O * A, 0.0);
            std::size_t i = 0;
            for (std::size_t sp = 0; sp < S; ++sp)
                for (std::size_t ap = 0; ap < A; ++ap)
                    for (std::size_t s = 0; s < S; ++s)
                        for (std::size_t o = 0; o < O; ++o)
                            for (std::size_t a = 0; a < A; ++a, ++i)
                                ext[i] = policy.delta[t](o, a) * m.emission(s, o) *
                                         m.transition(ap, sp, s) * prev(sp, ap);
            out.moments.extended.push_back(std::move(ext));
        }
        Vec next(S, 0.0);
        for (std::size_t sp = 0; sp < S; ++sp)
            for (std::size_t ap = 0; ap < A; ++ap) {
                const double w = musa(sp, ap);
                if (w == 0.0) continue;
                for (std::size_t s = 0; s < S; ++s) next[s] += m.transition(ap, sp, s) * w;
            }
        out.moments.mu_sa.push_back(std::move(musa));
        out.moments.mu_soa.push_back(std::move(musoa));
        mus.swap(next);
    }
    out.moments.mu_s.push_back(mus);  // t = T+1
    return out;
}

struct EnumerationResult {
    MemorylessPolicy policy;
    double value = -std::numeric_limits<double>::infinity();
    std::uint64_t policies_evaluated = 0;
};

/// Number of deterministic memoryless policies |A| * |A|^(|O| T), saturating.
inline std::uint64_t deterministic_policy_count(std::size_t n_actions, std::size_t n_obs, int T) {
    std::uint64_t count = n_actions;
    for (int k = 0; k < T * static_cast<int>(n_obs); ++k) {
        if (count > std::numeric_limits<std::uint64_t>::max() / n_actions)
            return std::numeric_limits<std::uint64_t>::max();
        count *= n_actions;
    }
    return count;
}

/**
 * Exhaustive search over deterministic memoryless policies (stage-0 rule
 * observation-blind). Ties keep the lexicographically smallest policy.
 * Throws SearchSpaceExceedsGuard when the space is larger than `guard`.
 */
inline EnumerationResult enumerate_optimal(const PomdpInstance& m, const RewardSpec& rewards,
                                           std::uint64_t guard = 500000) {
    const std::size_t A = m.n_actions(), O = m.n_observations();
    const int T = rewards.horizon;
    const std::uint64_t count = deterministic_policy_count(A, O, T);
    if (count > guard) throw SearchSpaceExceedsGuard(count, guard);

    EnumerationResult best;
    std::vector<std::size_t> digits(static_cast<std::size_t>(T) * O, 0);
    std::vector<std::vector<std::size_t>> tail(T, std::vector<std::size_t>(O, 0));
    for (std::size_t a0 = 0; a0 < A; ++a0) {
        std::fill(digits.begin(), digits.end(), 0);
        while (true) {
            for (int t = 0; t < T; ++t)
                for (std::size_t o = 0; o < O; ++o) tail[t][o] = digits[t * O + o];
            auto pol = MemorylessPolicy::make_deterministic(O, A, a0, tail);
            const double v = evaluate_exact(m, pol, rewards).value;
            ++best.policies_evaluated;
            if (v > best.value) {
                best.value = v;
                best.policy = std::move(pol);
            }
            // odometer, last digit fastest, so iteration is lexicographic
            std::size_t k = digits.size();
            while (k > 0) {
                if (++digits[k - 1] < A) break;
                digits[k - 1] = 0;
                --k;
            }
            if (k == 0) break;
        }
    }
    return best;
}

}  // namespace pomdpml
