#pragma once
// Core POMDP data model: instance tables, beliefs, validation, and the
// preprocessed state conditionals shared by the rest of the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pomdpml {

using Vec = std::vector<double>;

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The requested observation has probability ~0 under the given belief/action.
struct ImpossibleObservation : Error {
    using Error::Error;
};

/// Row-sum tolerance for stored probability tables.
inline constexpr double kRowSumTol = 1e-9;
/// Denominator threshold below which a posterior is considered undefined.
inline constexpr double kImpossibleObsTol = 1e-12;

/// Dense row-major matrix with fixed dimensions.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const Vec& data() const { return data_; }
    Vec& data() { return data_; }

    bool operator==(const Matrix& o) const = default;

  private:
    std::size_t rows_ = 0, cols_ = 0;
    Vec data_;
};

/// Dense tensor indexed (i, j, k), stored row-major.
class Tensor3 {
  public:
    Tensor3() = default;
    Tensor3(std::size_t d0, std::size_t d1, std::size_t d2, double fill = 0.0)
        : d0_(d0), d1_(d1), d2_(d2), data_(d0 * d1 * d2, fill) {}

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * d1_ + j) * d2_ + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * d1_ + j) * d2_ + k];
    }

    std::size_t dim0() const { return d0_; }
    std::size_t dim1() const { return d1_; }
    std::size_t dim2() const { return d2_; }
    const Vec& data() const { return data_; }
    Vec& data() { return data_; }

    bool operator==(const Tensor3& o) const = default;

  private:
    std::size_t d0_ = 0, d1_ = 0, d2_ = 0;
    Vec data_;
};

/// Probability vector over states; the sufficient statistic of history.
struct Belief {
    Vec probs;

    std::size_t size() const { return probs.size(); }
    double operator[](std::size_t s) const { return probs[s]; }

    bool operator==(const Belief& o) const = default;
};

inline Belief uniform_belief(std::size_t n_states) {
    return Belief{Vec(n_states, 1.0 / static_cast<double>(n_states))};
}

/**
 * A finite POMDP: named states/actions/observations, transition tensor
 * p(s'|s,a), emission matrix p(o|s), expected rewards r(s,a), a discount
 * factor, and an initial belief.
 *
 * Source files may declare per-action emissions p(o|s,a); those are kept in
 * emission_raw. When all action slices agree the collapsed emission matrix
 * is authoritative, otherwise action_dependent_raw is set and model-building
 * layers refuse the instance.
 */
struct PomdpInstance {
    std::vector<std::string> states;
    std::vector<std::string> actions;
    std::vector<std::string> observations;

    Tensor3 transition;    // [a](s, s')
    Matrix emission;       // (s, o), collapsed across actions
    Tensor3 emission_raw;  // [a](s, o) as declared
    bool action_dependent_raw = false;
    Matrix reward;  // (s, a)
    double discount = 1.0;
    Belief initial_belief;

    std::size_t n_states() const { return states.size(); }
    std::size_t n_actions() const { return actions.size(); }
    std::size_t n_observations() const { return observations.size(); }

    bool operator==(const PomdpInstance& o) const = default;
};

struct ValidationReport {
    std::vector<std::string> issues;

    bool ok() const { return issues.empty(); }
};

/// Checks every stored probability table; returns one issue per violation.
inline ValidationReport validate(const PomdpInstance& m) {
    ValidationReport rep;
    const std::size_t S = m.n_states(), A = m.n_actions(), O = m.n_observations();
    auto issue = [&rep](const std::string& s) { rep.issues.push_back(s); };

    if (S == 0) issue("no states");
    if (A == 0) issue("no actions");
    if (O == 0) issue("no observations");
    if (!(m.discount > 0.0 && m.discount <= 1.0))
        issue("discount " + std::to_string(m.discount) + " outside (0,1]");

    for (std::size_t a = 0; a < A; ++a)
        for (std::size_t s = 0; s < S; ++s) {
            double sum = 0.0;
            for (std::size_t s2 = 0; s2 < S; ++s2) {
                const double p = m.transition(a, s, s2);
                if (p < 0.0) issue("transition(a=" + std::to_string(a) + ",s=" + std::to_string(s) + ",s'=" + std::to_string(s2) + ") negative");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                issue("transition row (s=" + std::to_string(s) + ",a=" + std::to_string(a) + ") sums to " + std::to_string(sum));
        }

    for (std::size_t a = 0; a < m.emission_raw.dim0(); ++a)
        for (std::size_t s = 0; s < S; ++s) {
            double sum = 0.0;
            for (std::size_t o = 0; o < O; ++o) {
                const double p = m.emission_raw(a, s, o);
                if (p < 0.0) issue("emission(a=" + std::to_string(a) + ",s=" + std::to_string(s) + ",o=" + std::to_string(o) + ") negative");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                issue("emission row (a=" + std::to_string(a) + ",s=" + std::to_string(s) + ") sums to " + std::to_string(sum));
        }

    if (!m.action_dependent_raw)
        for (std::size_t s = 0; s < S; ++s) {
            double sum = 0.0;
            for (std::size_t o = 0; o < O; ++o) {
                if (m.emission(s, o) < 0.0) issue("emission(s=" + std::to_string(s) + ",o=" + std::to_string(o) + ") negative");
                sum += m.emission(s, o);
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                issue("collapsed emission row s=" + std::to_string(s) + " sums to " + std::to_string(sum));
        }

    double bsum = 0.0;
    for (std::size_t s = 0; s < m.initial_belief.size(); ++s) {
        if (m.initial_belief[s] < 0.0) issue("initial belief entry " + std::to_string(s) + " negative");
        bsum += m.initial_belief[s];
    }
    if (m.initial_belief.size() != S)
        issue("initial belief has wrong dimension");
    else if (std::abs(bsum - 1.0) > kRowSumTol)
        issue("initial belief sums to " + std::to_string(bsum));

    return rep;
}

/**
 * Fraction of strict zeros across the transition tensor and the per-action
 * emission tables, matching the convention used by the bundled benchmark
 * descriptions: (#zeros in p(s'|s,a) + #zeros in p(o|s,a)) over
 * (|S|^2|A| + |S||O||A|).
 */
inline double sparsity(const PomdpInstance& m) {
    std::size_t zeros = 0;
    for (double v : m.transition.data())
        if (v == 0.0) ++zeros;
    for (double v : m.emission_raw.data())
        if (v == 0.0) ++zeros;
    const std::size_t total = m.transition.data().size() + m.emission_raw.data().size();
    return static_cast<double>(zeros) / static_cast<double>(total);
}

/// p(o | a, b) = sum_{s,s'} p(o|s) p(s|s',a) b(s'), a proper distribution.
inline Vec obs_given_action_belief(const PomdpInstance& m, const Belief& b, std::size_t a) {
    const std::size_t S = m.n_states(), O = m.n_observations();
    Vec next(S, 0.0);
    for (std::size_t sp = 0; sp < S; ++sp) {
        const double w = b[sp];
        if (w == 0.0) continue;
        for (std::size_t s = 0; s < S; ++s) next[s] += m.transition(a, sp, s) * w;
    }
    Vec out(O, 0.0);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t o = 0; o < O; ++o) out[o] += m.emission(s, o) * next[s];
    return out;
}

/**
 * Bayes posterior over the post-transition state:
 *   f(b,a,o)(s) = p(o|s) sum_{s'} p(s|s',a) b(s') / normalizer.
 * Throws ImpossibleObservation when the normalizer is below 1e-12.
 */
inline Belief belief_update(const PomdpInstance& m, const Belief& b, std::size_t a,
                            std::size_t o) {
    const std::size_t S = m.n_states();
    Vec post(S, 0.0);
    double den = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
        double pred = 0.0;
        for (std::size_t sp = 0; sp < S; ++sp) pred += m.transition(a, sp, s) * b[sp];
        post[s] = m.emission(s, o) * pred;
        den += post[s];
    }
    if (den <= kImpossibleObsTol) {
        std::ostringstream msg;
        msg << "observation " << o << " has probability " << den << " under action " << a;
        throw ImpossibleObservation(msg.str());
    }
    for (double& v : post) v /= den;
    return Belief{std::move(post)};
}

/**
 * Preprocessed conditionals p(s | s', a', o) indexed [a'](s', o, s), with a
 * mask for (a',s',o) triples whose normalizer vanishes; masked entries are 0.
 */
struct ConditionalStateTable {
    std::vector<Tensor3> probs;      // probs[a'](s', o, s)
    std::vector<std::uint8_t> mask;  // 1 when (a',s',o) is masked
    std::size_t S = 0, O = 0;

    bool masked(std::size_t ap, std::size_t sp, std::size_t o) const {
        return mask[(ap * S + sp) * O + o] != 0;
    }
    double operator()(std::size_t ap, std::size_t sp, std::size_t o, std::size_t s) const {
        return probs[ap](sp, o, s);
    }
};

inline ConditionalStateTable conditional_state_given_obs(const PomdpInstance& m) {
    const std::size_t S = m.n_states(), A = m.n_actions(), O = m.n_observations();
    ConditionalStateTable tab;
    tab.S = S;
    tab.O = O;
    tab.probs.assign(A, Tensor3(S, O, S, 0.0));
    tab.mask.assign(A * S * O, 0);
    for (std::size_t ap = 0; ap < A; ++ap)
        for (std::size_t sp = 0; sp < S; ++sp)
            for (std::size_t o = 0; o < O; ++o) {
                double den = 0.0;
                for (std::size_t s = 0; s < S; ++s) den += m.emission(s, o) * m.transition(ap, sp, s);
                if (den <= kImpossibleObsTol) {
                    tab.mask[(ap * S + sp) * O + o] = 1;
                    continue;
                }
                for (std::size_t s = 0; s < S; ++s)
                    tab.probs[ap](sp, o, s) = m.emission(s, o) * m.transition(ap, sp, s) / den;
            }
    return tab;
}

}  // namespace pomdpml
