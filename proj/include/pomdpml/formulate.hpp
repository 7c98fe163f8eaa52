#pragma once
// Builds the sparse memoryless moment models: base flow constraints, the
// McCormick envelope rows linking moments to the policy variables, and the
// optional one-step-memory extended formulation that tightens the linear
// relaxation. Also extracts moment vectors from solver points and checks
// them against the bilinear program they linearize.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pomdpml/lp_model.hpp"
#include "pomdpml/model.hpp"
#include "pomdpml/policy.hpp"
#include "pomdpml/rewards.hpp"

namespace pomdpml {

struct ActionDependentEmission : Error {
    using Error::Error;
};

struct MissingColumn : Error {
    using Error::Error;
};

struct FormulateOptions {
    bool cuts = false;      // add the extended one-step-memory rows
    bool integral = false;  // flag the policy columns binary
};

namespace detail {

inline std::string idx2(const char* head, int i, int j) {
    return std::string(head) + "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}
inline std::string idx3(const char* head, int i, int j, int k) {
    return std::string(head) + "(" + std::to_string(i) + "," + std::to_string(j) + "," +
           std::to_string(k) + ")";
}
inline std::string idx4(const char* head, int i, int j, int k, int l) {
    return std::string(head) + "(" + std::to_string(i) + "," + std::to_string(j) + "," +
           std::to_string(k) + "," + std::to_string(l) + ")";
}

}  // namespace detail

/**
 * Memoryless moment model over horizon T = rewards.horizon:
 *
 *   max  sum_t sum_{s,a} r_t(s,a) mu_sa^t
 *   s.t. delta^0(a|o) == delta^0(a|o')            (stage-0 tie)
 *        mu_s^0 = b(s)
 *        mu_s^t = sum_a mu_sa^t
 *        mu_sa^t = sum_o mu_soa^t
 *        mu_s^{t+1} = sum_{s',a'} p(s|s',a') mu_{s'a'}^t
 *        sum_a delta^t(a|o) = 1
 *        mu_soa^t <= p(o|s) mu_s^t
 *        mu_soa^t <= delta^t(a|o)
 *        mu_soa^t >= p(o|s) mu_s^t + delta^t(a|o) - 1
 *        mu, delta >= 0, delta <= 1
 *
 * With options.cuts, extended variables mu2^t(s',a',s,o,a) for t = 1..T and
 *        sum_{s',a'} mu2^t = mu_soa^t
 *        sum_a mu2^t = p(o|s) p(s|s',a') mu_{s'a'}^{t-1}
 *        mu2^t(s) = p(s|s',a',o) sum_sbar mu2^t(sbar)   [unmasked triples]
 *
 * With options.integral the policy columns are flagged binary.
 */
inline LpModel build_memoryless_model(const PomdpInstance& m, const RewardSpec& rewards,
                                      const FormulateOptions& options = {}) {
    if (m.action_dependent_raw)
        throw ActionDependentEmission(
            "instance has action-dependent emissions that do not collapse; "
            "the moment model needs p(o|s)");
    if (rewards.horizon < 0) throw HorizonNegative("reward horizon is negative");

    const int S = static_cast<int>(m.n_states());
    const int A = static_cast<int>(m.n_actions());
    const int O = static_cast<int>(m.n_observations());
    const int T = rewards.horizon;

    LpModel model;
    model.index = VariableIndex{S, A, O, T, options.cuts};

    // columns, in index order
    for (int t = 0; t <= T; ++t) {
        for (int s = 0; s < S; ++s) model.add_col(detail::idx2("mu_s", t, s), 0.0, kInf);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) model.add_col(detail::idx3("mu_sa", t, s, a), 0.0, kInf);
        for (int s = 0; s < S; ++s)
            for (int o = 0; o < O; ++o)
                for (int a = 0; a < A; ++a)
                    model.add_col(detail::idx4("mu_soa", t, s, o, a), 0.0, kInf);
        for (int o = 0; o < O; ++o)
            for (int a = 0; a < A; ++a)
                model.add_col(detail::idx3("delta", t, o, a), 0.0, 1.0, options.integral);
    }
    for (int s = 0; s < S; ++s) model.add_col(detail::idx2("mu_s", T + 1, s), 0.0, kInf);
    if (options.cuts)
        for (int t = 1; t <= T; ++t)
            for (int sp = 0; sp < S; ++sp)
                for (int ap = 0; ap < A; ++ap)
                    for (int s = 0; s < S; ++s)
                        for (int o = 0; o < O; ++o)
                            for (int a = 0; a < A; ++a)
                                model.add_col("mu2(" + std::to_string(t) + "," +
                                                  std::to_string(sp) + "," + std::to_string(ap) +
                                                  "," + std::to_string(s) + "," +
                                                  std::to_string(o) + "," + std::to_string(a) + ")",
                                              0.0, kInf);

    const VariableIndex& ix = model.index;
    for (int t = 0; t <= T; ++t)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a)
                model.objective[ix.mu_sa(t, s, a)] = rewards.table[t](s, a);

    // stage-0 tie
    for (int o = 1; o < O; ++o)
        for (int a = 0; a < A; ++a) {
            auto& row = model.add_row(detail::idx2("d0_tie", o, a), RowSense::Equal, 0.0);
            row.coeffs = {{ix.delta(0, o, a), 1.0}, {ix.delta(0, 0, a), -1.0}};
        }
    // initial state mass
    for (int s = 0; s < S; ++s) {
        auto& row = model.add_row("mu_init(" + std::to_string(s) + ")", RowSense::Equal,
                                  m.initial_belief[s]);
        row.coeffs = {{ix.mu_s(0, s), 1.0}};
    }
    // state mass splits over actions
    for (int t = 0; t <= T; ++t)
        for (int s = 0; s < S; ++s) {
            auto& row = model.add_row(detail::idx2("mass_sa", t, s), RowSense::Equal, 0.0);
            row.coeffs.push_back({ix.mu_s(t, s), 1.0});
            for (int a = 0; a < A; ++a) row.coeffs.push_back({ix.mu_sa(t, s, a), -1.0});
        }
    // state-action mass splits over observations
    for (int t = 0; t <= T; ++t)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                auto& row = model.add_row(detail::idx3("mass_obs", t, s, a), RowSense::Equal, 0.0);
                row.coeffs.push_back({ix.mu_sa(t, s, a), 1.0});
                for (int o = 0; o < O; ++o) row.coeffs.push_back({ix.mu_soa(t, s, o, a), -1.0});
            }
    // flow conservation into the next stage
    for (int t = 0; t <= T; ++t)
        for (int s = 0; s < S; ++s) {
            auto& row = model.add_row(detail::idx2("flow", t, s), RowSense::Equal, 0.0);
            row.coeffs.push_back({ix.mu_s(t + 1, s), 1.0});
            for (int sp = 0; sp < S; ++sp)
                for (int ap = 0; ap < A; ++ap) {
                    const double p = m.transition(ap, sp, s);
                    if (p != 0.0) row.coeffs.push_back({ix.mu_sa(t, sp, ap), -p});
                }
        }
    // policy simplex rows
    for (int t = 0; t <= T; ++t)
        for (int o = 0; o < O; ++o) {
            auto& row = model.add_row(detail::idx2("policy_simplex", t, o), RowSense::Equal, 1.0);
            for (int a = 0; a < A; ++a) row.coeffs.push_back({ix.delta(t, o, a), 1.0});
        }
    // McCormick envelope of mu_soa = delta * p(o|s) * mu_s
    for (int t = 0; t <= T; ++t)
        for (int s = 0; s < S; ++s)
            for (int o = 0; o < O; ++o)
                for (int a = 0; a < A; ++a) {
                    const double e = m.emission(s, o);
                    auto& up1 = model.add_row("mcc_emission" + detail::idx4("", t, s, o, a),
                                              RowSense::LessEqual, 0.0);
                    up1.coeffs = {{ix.mu_soa(t, s, o, a), 1.0}, {ix.mu_s(t, s), -e}};
                    auto& up2 = model.add_row("mcc_policy" + detail::idx4("", t, s, o, a),
                                              RowSense::LessEqual, 0.0);
                    up2.coeffs = {{ix.mu_soa(t, s, o, a), 1.0}, {ix.delta(t, o, a), -1.0}};
                    auto& lo = model.add_row("mcc_lower" + detail::idx4("", t, s, o, a),
                                             RowSense::GreaterEqual, -1.0);
                    lo.coeffs = {{ix.mu_soa(t, s, o, a), 1.0},
                                 {ix.mu_s(t, s), -e},
                                 {ix.delta(t, o, a), -1.0}};
                }

    if (options.cuts) {
        const ConditionalStateTable cond = conditional_state_given_obs(m);
        for (int t = 1; t <= T; ++t) {
            for (int s = 0; s < S; ++s)
                for (int o = 0; o < O; ++o)
                    for (int a = 0; a < A; ++a) {
                        auto& row = model.add_row("ext_mass" + detail::idx4("", t, s, o, a),
                                                  RowSense::Equal, 0.0);
                        row.coeffs.push_back({ix.mu_soa(t, s, o, a), -1.0});
                        for (int sp = 0; sp < S; ++sp)
                            for (int ap = 0; ap < A; ++ap)
                                row.coeffs.push_back({ix.ext(t, sp, ap, s, o, a), 1.0});
                    }
            for (int sp = 0; sp < S; ++sp)
                for (int ap = 0; ap < A; ++ap)
                    for (int s = 0; s < S; ++s)
                        for (int o = 0; o < O; ++o) {
                            auto& row = model.add_row(
                                "ext_flow(" + std::to_string(t) + "," + std::to_string(sp) + "," +
                                    std::to_string(ap) + "," + std::to_string(s) + "," +
                                    std::to_string(o) + ")",
                                RowSense::Equal, 0.0);
                            for (int a = 0; a < A; ++a)
                                row.coeffs.push_back({ix.ext(t, sp, ap, s, o, a), 1.0});
                            const double p = m.emission(s, o) * m.transition(ap, sp, s);
                            if (p != 0.0) row.coeffs.push_back({ix.mu_sa(t - 1, sp, ap), -p});
                        }
            for (int sp = 0; sp < S; ++sp)
                for (int ap = 0; ap < A; ++ap)
                    for (int o = 0; o < O; ++o) {
                        if (cond.masked(ap, sp, o)) continue;  // forced to zero by ext_flow
                        for (int s = 0; s < S; ++s)
                            for (int a = 0; a < A; ++a) {
                                auto& row = model.add_row(
                                    "ext_cond(" + std::to_string(t) + "," + std::to_string(sp) +
                                        "," + std::to_string(ap) + "," + std::to_string(s) + "," +
                                        std::to_string(o) + "," + std::to_string(a) + ")",
                                    RowSense::Equal, 0.0);
                                const double pc = cond(ap, sp, o, s);
                                for (int sb = 0; sb < S; ++sb) {
                                    double coef = (sb == s ? 1.0 : 0.0) - pc;
                                    if (coef != 0.0)
                                        row.coeffs.push_back({ix.ext(t, sp, ap, sb, o, a), coef});
                                }
                            }
                    }
        }
    }
    return model;
}

/**
 * Reads the moment vectors out of a solver point using the model's column
 * map. The policy is extracted from the delta columns; when every entry is
 * within 1e-6 of {0,1} it is rounded and flagged deterministic.
 */
inline MomentSolution extract_moments(const LpModel& model, const Vec& x) {
    const VariableIndex& ix = model.index;
    if (static_cast<int>(x.size()) < ix.n_cols())
        throw MissingColumn("solution has " + std::to_string(x.size()) + " values, model needs " +
                            std::to_string(ix.n_cols()));
    MomentSolution out;
    out.horizon = ix.T;
    for (int t = 0; t <= ix.T + 1; ++t) {
        Vec mus(ix.S);
        for (int s = 0; s < ix.S; ++s) mus[s] = x[ix.mu_s(t, s)];
        out.mu_s.push_back(std::move(mus));
    }
    for (int t = 0; t <= ix.T; ++t) {
        Matrix musa(ix.S, ix.A);
        Tensor3 musoa(ix.S, ix.O, ix.A);
        for (int s = 0; s < ix.S; ++s)
            for (int a = 0; a < ix.A; ++a) {
                musa(s, a) = x[ix.mu_sa(t, s, a)];
                for (int o = 0; o < ix.O; ++o) musoa(s, o, a) = x[ix.mu_soa(t, s, o, a)];
            }
        out.mu_sa.push_back(std::move(musa));
        out.mu_soa.push_back(std::move(musoa));
    }
    if (ix.cuts)
        for (int t = 1; t <= ix.T; ++t) {
            Vec ext(static_cast<std::size_t>(ix.ext_block()));
            std::size_t i = 0;
            for (int sp = 0; sp < ix.S; ++sp)
                for (int ap = 0; ap < ix.A; ++ap)
                    for (int s = 0; s < ix.S; ++s)
                        for (int o = 0; o < ix.O; ++o)
                            for (int a = 0; a < ix.A; ++a, ++i)
                                ext[i] = x[ix.ext(t, sp, ap, s, o, a)];
            out.extended.push_back(std::move(ext));
        }

    out.policy.delta.clear();
    bool deterministic = true;
    for (int t = 0; t <= ix.T; ++t) {
        Matrix dt(ix.O, ix.A);
        for (int o = 0; o < ix.O; ++o)
            for (int a = 0; a < ix.A; ++a) {
                const double v = x[ix.delta(t, o, a)];
                dt(o, a) = v;
                if (std::abs(v) > 1e-6 && std::abs(v - 1.0) > 1e-6) deterministic = false;
            }
        out.policy.delta.push_back(std::move(dt));
    }
    if (deterministic)
        for (auto& dt : out.policy.delta)
            for (double& v : dt.data()) v = v > 0.5 ? 1.0 : 0.0;
    out.policy.deterministic = deterministic;
    out.policy_deterministic_flag = deterministic;
    return out;
}

/// Max absolute residual per constraint family of the bilinear program.
struct NlpResidualReport {
    double stage0_tie = 0.0;       // delta^0 rows equal
    double initial_mass = 0.0;     // mu_s^0 = b
    double state_mass = 0.0;       // mu_s = sum_a mu_sa
    double obs_mass = 0.0;         // mu_sa = sum_o mu_soa
    double flow = 0.0;             // mu_s^{t+1} = sum p mu_sa^t
    double bilinear = 0.0;         // mu_soa = delta p(o|s) mu_s
    double policy_simplex = 0.0;   // sum_a delta = 1
    double nonnegativity = 0.0;    // most negative entry, as a magnitude
    double cut_rows = 0.0;         // extended-family rows, when present

    double max_residual() const {
        double m = stage0_tie;
        for (double v : {initial_mass, state_mass, obs_mass, flow, bilinear, policy_simplex,
                         nonnegativity, cut_rows})
            m = std::max(m, v);
        return m;
    }
};

/**
 * Measures how far a (moments, policy) pair is from satisfying the bilinear
 * moment program; a max residual below 1e-8 certifies the moments are the
 * ones induced by the policy.
 */
inline NlpResidualReport check_nlp_feasibility(const PomdpInstance& m, const MomentSolution& mom,
                                               const MemorylessPolicy& policy) {
    NlpResidualReport rep;
    const int S = static_cast<int>(m.n_states());
    const int A = static_cast<int>(m.n_actions());
    const int O = static_cast<int>(m.n_observations());
    const int T = mom.horizon;
    auto bump = [](double& slot, double v) { slot = std::max(slot, std::abs(v)); };

    for (int o = 1; o < O; ++o)
        for (int a = 0; a < A; ++a) bump(rep.stage0_tie, policy.delta[0](o, a) - policy.delta[0](0, a));
    for (int s = 0; s < S; ++s) bump(rep.initial_mass, mom.mu_s[0][s] - m.initial_belief[s]);
    for (int t = 0; t <= T; ++t) {
        for (int s = 0; s < S; ++s) {
            double sum = 0.0;
            for (int a = 0; a < A; ++a) sum += mom.mu_sa[t](s, a);
            bump(rep.state_mass, mom.mu_s[t][s] - sum);
        }
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                double sum = 0.0;
                for (int o = 0; o < O; ++o) sum += mom.mu_soa[t](s, o, a);
                bump(rep.obs_mass, mom.mu_sa[t](s, a) - sum);
            }
        for (int s = 0; s < S; ++s) {
            double sum = 0.0;
            for (int sp = 0; sp < S; ++sp)
                for (int ap = 0; ap < A; ++ap) sum += m.transition(ap, sp, s) * mom.mu_sa[t](sp, ap);
            bump(rep.flow, mom.mu_s[t + 1][s] - sum);
        }
        for (int s = 0; s < S; ++s)
            for (int o = 0; o < O; ++o)
                for (int a = 0; a < A; ++a)
                    bump(rep.bilinear, mom.mu_soa[t](s, o, a) -
                                           policy.delta[t](o, a) * m.emission(s, o) * mom.mu_s[t][s]);
        for (int o = 0; o < O; ++o) {
            double sum = 0.0;
            for (int a = 0; a < A; ++a) {
                sum += policy.delta[t](o, a);
                if (policy.delta[t](o, a) < 0.0) bump(rep.nonnegativity, policy.delta[t](o, a));
            }
            bump(rep.policy_simplex, sum - 1.0);
        }
    }
    for (const auto& v : mom.mu_s)
        for (double x : v)
            if (x < 0.0) bump(rep.nonnegativity, x);
    for (const auto& mat : mom.mu_sa)
        for (double x : mat.data())
            if (x < 0.0) bump(rep.nonnegativity, x);
    for (const auto& t3 : mom.mu_soa)
        for (double x : t3.data())
            if (x < 0.0) bump(rep.nonnegativity, x);

    if (mom.has_extended()) {
        const ConditionalStateTable cond = conditional_state_given_obs(m);
        auto at = [&](int t, int sp, int ap, int s, int o, int a) {
            return mom.extended[t - 1][((((sp * A + ap) * S + s) * O + o) * A + a)];
        };
        for (int t = 1; t <= T; ++t) {
            for (int s = 0; s < S; ++s)
                for (int o = 0; o < O; ++o)
                    for (int a = 0; a < A; ++a) {
                        double sum = 0.0;
                        for (int sp = 0; sp < S; ++sp)
                            for (int ap = 0; ap < A; ++ap) sum += at(t, sp, ap, s, o, a);
                        bump(rep.cut_rows, sum - mom.mu_soa[t](s, o, a));
                    }
            for (int sp = 0; sp < S; ++sp)
                for (int ap = 0; ap < A; ++ap)
                    for (int s = 0; s < S; ++s)
                        for (int o = 0; o < O; ++o) {
                            double sum = 0.0;
                            for (int a = 0; a < A; ++a) sum += at(t, sp, ap, s, o, a);
                            bump(rep.cut_rows, sum - m.emission(s, o) * m.transition(ap, sp, s) *
                                                         mom.mu_sa[t - 1](sp, ap));
                        }
            for (int sp = 0; sp < S; ++sp)
                for (int ap = 0; ap < A; ++ap)
                    for (int o = 0; o < O; ++o) {
                        if (cond.masked(ap, sp, o)) continue;
                        for (int s = 0; s < S; ++s)
                            for (int a = 0; a < A; ++a) {
                                double sum = 0.0;
                                for (int sb = 0; sb < S; ++sb) sum += at(t, sp, ap, sb, o, a);
                                bump(rep.cut_rows,
                                     at(t, sp, ap, s, o, a) - cond(ap, sp, o, s) * sum);
                            }
                    }
        }
    }
    return rep;
}

}  // namespace pomdpml
