#pragma once
// Shared fixtures: benchmark paths, tiny hand-built instances, a seeded
// random-instance generator, and the independent oracles (policy iteration,
// trajectory Monte Carlo) used to cross-check the production code paths.

#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "pomdpml/cassandra.hpp"
#include "pomdpml/mdp.hpp"
#include "pomdpml/model.hpp"
#include "pomdpml/policy.hpp"
#include "pomdpml/rewards.hpp"

namespace testutil {

using namespace pomdpml;

inline std::string bench_path(const std::string& name) {
    return std::string(POMDPML_BENCH_DIR) + "/" + name + ".pomdp";
}

inline PomdpInstance load_bench(const std::string& name) {
    std::ifstream in(bench_path(name));
    if (!in) throw Error("missing benchmark file " + name);
    return parse_pomdp(in);
}

/// Fills emission_raw with copies of the collapsed matrix.
inline void sync_raw_emission(PomdpInstance& m) {
    m.emission_raw = Tensor3(m.n_actions(), m.n_states(), m.n_observations());
    for (std::size_t a = 0; a < m.n_actions(); ++a)
        for (std::size_t s = 0; s < m.n_states(); ++s)
            for (std::size_t o = 0; o < m.n_observations(); ++o)
                m.emission_raw(a, s, o) = m.emission(s, o);
}

/// 1 state, 1 action, 1 observation, unit reward.
inline PomdpInstance degenerate_instance() {
    PomdpInstance m;
    m.states = {"s0"};
    m.actions = {"a0"};
    m.observations = {"o0"};
    m.transition = Tensor3(1, 1, 1, 1.0);
    m.emission = Matrix(1, 1, 1.0);
    m.reward = Matrix(1, 1, 1.0);
    m.discount = 0.9;
    m.initial_belief = uniform_belief(1);
    sync_raw_emission(m);
    return m;
}

/// Deterministic cycle with identity observations; fully observable.
inline PomdpInstance cycle_instance(std::size_t n = 3) {
    PomdpInstance m;
    for (std::size_t i = 0; i < n; ++i) {
        m.states.push_back("s" + std::to_string(i));
        m.observations.push_back("o" + std::to_string(i));
    }
    m.actions = {"stay", "step"};
    m.transition = Tensor3(2, n, n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        m.transition(0, s, s) = 1.0;
        m.transition(1, s, (s + 1) % n) = 1.0;
    }
    m.emission = Matrix(n, n, 0.0);
    for (std::size_t s = 0; s < n; ++s) m.emission(s, s) = 1.0;
    m.reward = Matrix(n, 2, 0.0);
    m.reward(0, 0) = 1.0;  // staying in s0 pays
    m.discount = 0.9;
    m.initial_belief = uniform_belief(n);
    sync_raw_emission(m);
    return m;
}

/// Random dense-ish instance with rows drawn from normalized exponentials.
inline PomdpInstance random_instance(std::uint64_t seed, std::size_t S = 3, std::size_t A = 2,
                                     std::size_t O = 2) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> exp_dist(1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto row = [&](double* out, std::size_t n) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = exp_dist(rng) + 1e-3;
            sum += out[i];
        }
        for (std::size_t i = 0; i < n; ++i) out[i] /= sum;
    };
    PomdpInstance m;
    for (std::size_t i = 0; i < S; ++i) m.states.push_back("s" + std::to_string(i));
    for (std::size_t i = 0; i < A; ++i) m.actions.push_back("a" + std::to_string(i));
    for (std::size_t i = 0; i < O; ++i) m.observations.push_back("o" + std::to_string(i));
    m.transition = Tensor3(A, S, S);
    for (std::size_t a = 0; a < A; ++a)
        for (std::size_t s = 0; s < S; ++s) row(&m.transition.data()[(a * S + s) * S], S);
    m.emission = Matrix(S, O);
    for (std::size_t s = 0; s < S; ++s) row(&m.emission.data()[s * O], O);
    m.reward = Matrix(S, A);
    for (double& v : m.reward.data()) v = unif(rng);
    m.discount = 0.9;
    Vec b(S);
    row(b.data(), S);
    m.initial_belief = Belief{b};
    sync_raw_emission(m);
    return m;
}

/// Random deterministic memoryless policy (stage-0 observation-blind).
inline MemorylessPolicy random_policy(std::uint64_t seed, std::size_t O, std::size_t A, int T) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, A - 1);
    const std::size_t a0 = pick(rng);
    std::vector<std::vector<std::size_t>> tail(T, std::vector<std::size_t>(O));
    for (auto& stage : tail)
        for (auto& a : stage) a = pick(rng);
    return MemorylessPolicy::make_deterministic(O, A, a0, tail);
}

/// Policy-iteration oracle for the infinite-horizon MDP value; evaluation
/// solves (I - gamma P_pi) v = r_pi by Gaussian elimination.
inline Vec policy_iteration_values(const PomdpInstance& m, double tol = 1e-12) {
    const std::size_t S = m.n_states(), A = m.n_actions();
    const double gamma = m.discount;
    std::vector<std::size_t> pi(S, 0);
    Vec v(S, 0.0);
    for (std::size_t round = 0; round < 1000; ++round) {
        // evaluate pi
        std::vector<Vec> M(S, Vec(S + 1, 0.0));
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t s2 = 0; s2 < S; ++s2)
                M[s][s2] = (s == s2 ? 1.0 : 0.0) - gamma * m.transition(pi[s], s, s2);
            M[s][S] = m.reward(s, pi[s]);
        }
        for (std::size_t c = 0; c < S; ++c) {
            std::size_t piv = c;
            for (std::size_t r2 = c + 1; r2 < S; ++r2)
                if (std::abs(M[r2][c]) > std::abs(M[piv][c])) piv = r2;
            std::swap(M[c], M[piv]);
            for (std::size_t r2 = 0; r2 < S; ++r2) {
                if (r2 == c || M[r2][c] == 0.0) continue;
                const double f = M[r2][c] / M[c][c];
                for (std::size_t cc = c; cc <= S; ++cc) M[r2][cc] -= f * M[c][cc];
            }
        }
        for (std::size_t s = 0; s < S; ++s) v[s] = M[s][S] / M[s][s];
        // improve
        bool changed = false;
        for (std::size_t s = 0; s < S; ++s) {
            double best = -1e300;
            std::size_t best_a = 0;
            for (std::size_t a = 0; a < A; ++a) {
                double q = m.reward(s, a);
                for (std::size_t s2 = 0; s2 < S; ++s2) q += gamma * m.transition(a, s, s2) * v[s2];
                if (q > best + tol) {
                    best = q;
                    best_a = a;
                }
            }
            if (best_a != pi[s]) {
                pi[s] = best_a;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return v;
}

/// Monte Carlo oracle for the finite-horizon value of a memoryless policy.
/// Samples the process exactly as the moment recursion models it.
inline std::pair<double, double> mc_policy_value(const PomdpInstance& m,
                                                 const MemorylessPolicy& pol,
                                                 const RewardSpec& rewards, std::size_t n_traj,
                                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t S = m.n_states(), A = m.n_actions(), O = m.n_observations();
    auto draw = [&](const double* w, std::size_t n) {
        double u = unif(rng), acc = 0.0, total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += w[i];
        u *= total;
        for (std::size_t i = 0; i < n; ++i) {
            acc += w[i];
            if (u < acc) return i;
        }
        return n - 1;
    };
    const int T = rewards.horizon;
    double sum = 0.0, sumsq = 0.0;
    Vec trow(S), erow(O), arow(A);
    for (std::size_t k = 0; k < n_traj; ++k) {
        std::size_t s = draw(m.initial_belief.probs.data(), S);
        double total = 0.0;
        for (int t = 0; t <= T; ++t) {
            for (std::size_t o = 0; o < O; ++o) erow[o] = m.emission(s, o);
            const std::size_t obs = draw(erow.data(), O);
            for (std::size_t a = 0; a < A; ++a) arow[a] = pol.delta[t](obs, a);
            const std::size_t act = draw(arow.data(), A);
            total += rewards.table[t](s, act);
            for (std::size_t s2 = 0; s2 < S; ++s2) trow[s2] = m.transition(act, s, s2);
            s = draw(trow.data(), S);
        }
        sum += total;
        sumsq += total * total;
    }
    const double mean = sum / n_traj;
    const double var = (sumsq - n_traj * mean * mean) / (n_traj - 1);
    return {mean, std::sqrt(std::max(var, 0.0) / n_traj)};
}

}  // namespace testutil
