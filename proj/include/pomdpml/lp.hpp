#pragma once
// Self-contained bounded-variable revised simplex with a product-form
// inverse. Phase 1 drives artificial variables out of the basis, phase 2
// optimizes the true objective. Dantzig pricing with a Bland fallback after
// a stall keeps the method finite; the factorization is rebuilt every
// kRefactorEvery pivots.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <chrono>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pomdpml/lp_model.hpp"

namespace pomdpml {

struct NumericalBreakdown : Error {
    using Error::Error;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
        case LpStatus::IterationLimit: return "IterationLimit";
    }
    return "?";
}

struct LpParams {
    double tol_feas = 1e-9;
    double tol_opt = 1e-9;
    std::size_t max_iters = 0;  // 0 = automatic
    std::size_t refactor_every = 100;
    std::size_t bland_after = 1000;  // degenerate pivots before Bland's rule
};

struct LpSolution {
    LpStatus status = LpStatus::IterationLimit;
    Vec x;                  // structural column values
    double objective = 0.0;
    std::size_t iterations = 0;
    double feas_residual = 0.0;  // max row violation at exit
};

/// Solver internals exposed for tuning and tests.
struct LpRunStats {
    std::size_t refactor_count = 0;
    std::size_t last_bump = 0;      // columns that needed transformed pivoting
    std::size_t last_eta_nnz = 0;   // size of the rebuilt inverse
    double refactor_seconds = 0.0;
};

/// Per-column bound override used by branch-and-bound node fixings.
struct BoundFix {
    int col;
    double lower, upper;
};

/// Nonbasic-at-lower / nonbasic-at-upper / basic marker per column.
enum class VarStatus : std::uint8_t { AtLower, AtUpper, Basic };
using LpBasis = std::vector<VarStatus>;

namespace detail {

/// Column-major copy of the model plus logical and artificial columns.
class SimplexData {
  public:
    int m = 0;       // rows
    int n_struct = 0;
    int n_logic = 0;     // == m
    Vec rhs;
    Vec lower, upper;    // per column, structural then logical then artificial
    Vec obj;             // true objective (maximize)
    std::vector<int> col_start;
    std::vector<int> col_row;
    Vec col_val;

    int n_total() const { return n_struct + n_logic + m; }
    int artificial(int row) const { return n_struct + n_logic + row; }
    bool is_artificial(int j) const { return j >= n_struct + n_logic; }

    explicit SimplexData(const LpModel& model, const std::vector<BoundFix>* fixes) {
        m = model.n_rows();
        n_struct = model.n_cols();
        n_logic = m;
        rhs.resize(m);
        obj.assign(n_total(), 0.0);
        lower.assign(n_total(), 0.0);
        upper.assign(n_total(), 0.0);

        for (int j = 0; j < n_struct; ++j) {
            lower[j] = model.cols[j].lower;
            upper[j] = model.cols[j].upper;
            obj[j] = model.objective[j];
        }
        if (fixes)
            for (const auto& f : *fixes) {
                lower[f.col] = f.lower;
                upper[f.col] = f.upper;
            }
        for (int i = 0; i < m; ++i) {
            rhs[i] = model.rows[i].rhs;
            const int j = n_struct + i;
            switch (model.rows[i].sense) {
                case RowSense::Equal:
                    lower[j] = upper[j] = 0.0;
                    break;
                case RowSense::LessEqual:
                    lower[j] = 0.0;
                    upper[j] = kInf;
                    break;
                case RowSense::GreaterEqual:
                    lower[j] = -kInf;
                    upper[j] = 0.0;
                    break;
            }
        }
        for (int i = 0; i < m; ++i) {
            lower[artificial(i)] = 0.0;
            upper[artificial(i)] = kInf;
        }

        // column-major structural matrix
        std::vector<int> counts(n_struct, 0);
        for (const auto& row : model.rows)
            for (const auto& [col, v] : row.coeffs)
                if (v != 0.0) ++counts[col];
        col_start.assign(n_struct + 1, 0);
        for (int j = 0; j < n_struct; ++j) col_start[j + 1] = col_start[j] + counts[j];
        col_row.resize(col_start[n_struct]);
        col_val.resize(col_start[n_struct]);
        std::vector<int> fill(col_start.begin(), col_start.end() - 1);
        for (int i = 0; i < m; ++i)
            for (const auto& [col, v] : model.rows[i].coeffs)
                if (v != 0.0) {
                    col_row[fill[col]] = i;
                    col_val[fill[col]] = v;
                    ++fill[col];
                }
    }

    /// Writes column j (structural, logical or signed artificial) into a
    /// dense scratch vector; returns the touched indices.
    void scatter_column(int j, double art_sign, Vec& dense, std::vector<int>& touched) const {
        if (j < n_struct) {
            for (int k = col_start[j]; k < col_start[j + 1]; ++k) {
                dense[col_row[k]] = col_val[k];
                touched.push_back(col_row[k]);
            }
        } else if (j < n_struct + n_logic) {
            dense[j - n_struct] = 1.0;
            touched.push_back(j - n_struct);
        } else {
            dense[j - n_struct - n_logic] = art_sign;
            touched.push_back(j - n_struct - n_logic);
        }
    }

    double dot_column(int j, const Vec& y, double art_sign) const {
        if (j < n_struct) {
            double s = 0.0;
            for (int k = col_start[j]; k < col_start[j + 1]; ++k) s += y[col_row[k]] * col_val[k];
            return s;
        }
        if (j < n_struct + n_logic) return y[j - n_struct];
        return art_sign * y[j - n_struct - n_logic];
    }
};

struct Eta {
    int row;
    std::vector<std::pair<int, double>> entries;  // includes the pivot entry
    double pivot;
};

}  // namespace detail

/**
 * Maximizes the model objective subject to its rows and bounds, ignoring
 * integrality flags. Deterministic for identical inputs. Optional bound
 * fixes overlay the column bounds; an optional warm basis is used when it
 * factorizes, and silently discarded otherwise.
 */
class SimplexSolver {
  public:
    explicit SimplexSolver(const LpModel& model, const LpParams& params = {},
                           const std::vector<BoundFix>* fixes = nullptr)
        : data_(model, fixes), params_(params) {
        if (params_.max_iters == 0)
            params_.max_iters = 20000 + 50 * static_cast<std::size_t>(data_.m);
    }

    LpSolution solve(const LpBasis* warm = nullptr) {
        init_artificial_sign_();
        if (warm == nullptr || !try_warm_start_(*warm)) cold_start_();
        return run_();
    }

  private:
    detail::SimplexData data_;
    LpParams params_;

    std::vector<VarStatus> status_;
    std::vector<int> basis_;      // column basic in each row
    Vec xB_;                      // basic values per row
    std::vector<detail::Eta> etas_;
    Vec art_sign_;                // +-1 per row
    int phase_ = 1;
    std::size_t iters_ = 0;
    std::size_t pivots_since_refactor_ = 0;
    std::size_t degen_streak_ = 0;
    bool bland_ = false;

    // scratch
    Vec work_, y_;
    std::vector<int> touched_;
    LpRunStats stats_;

    double bound_value_(int j) const {
        return status_[j] == VarStatus::AtUpper ? data_.upper[j] : data_.lower[j];
    }

    void init_artificial_sign_() {
        // sign chosen so the artificial enters the initial basis nonnegative
        art_sign_.assign(data_.m, 1.0);
        Vec r = initial_residual_();
        for (int i = 0; i < data_.m; ++i) art_sign_[i] = r[i] < 0.0 ? -1.0 : 1.0;
    }

    /// b - A x_N - s_N with every non-artificial column at its status bound.
    Vec initial_residual_() const {
        Vec r = data_.rhs;
        for (int j = 0; j < data_.n_struct; ++j) {
            const double v = nonbasic_start_value_(j);
            if (v == 0.0) continue;
            for (int k = data_.col_start[j]; k < data_.col_start[j + 1]; ++k)
                r[data_.col_row[k]] -= data_.col_val[k] * v;
        }
        // logicals start at 0, so nothing to subtract
        return r;
    }

    double nonbasic_start_value_(int j) const {
        if (std::isfinite(data_.lower[j])) return data_.lower[j];
        if (std::isfinite(data_.upper[j])) return data_.upper[j];
        return 0.0;
    }

    void cold_start_() {
        status_.assign(data_.n_total(), VarStatus::AtLower);
        for (int j = 0; j < data_.n_struct + data_.n_logic; ++j)
            if (!std::isfinite(data_.lower[j]) && std::isfinite(data_.upper[j]))
                status_[j] = VarStatus::AtUpper;
        basis_.resize(data_.m);
        Vec r = initial_residual_();
        xB_.resize(data_.m);
        for (int i = 0; i < data_.m; ++i) {
            const int a = data_.artificial(i);
            basis_[i] = a;
            status_[a] = VarStatus::Basic;
            xB_[i] = art_sign_[i] * r[i];
        }
        etas_.clear();
        phase_ = 1;
    }

    bool try_warm_start_(const LpBasis& warm) {
        if (static_cast<int>(warm.size()) != data_.n_struct + data_.n_logic) return false;
        std::vector<int> basics;
        for (int j = 0; j < static_cast<int>(warm.size()); ++j)
            if (warm[j] == VarStatus::Basic) basics.push_back(j);
        if (static_cast<int>(basics.size()) != data_.m) return false;
        status_.assign(data_.n_total(), VarStatus::AtLower);
        for (int j = 0; j < static_cast<int>(warm.size()); ++j) status_[j] = warm[j];
        for (int j = 0; j < static_cast<int>(warm.size()); ++j)
            if (status_[j] == VarStatus::AtUpper && !std::isfinite(data_.upper[j]))
                status_[j] = VarStatus::AtLower;
        basis_ = basics;
        if (!refactorize_()) return false;
        phase_ = 2;
        for (int i = 0; i < data_.m; ++i) {
            if (xB_[i] < data_.lower[basis_[i]] - params_.tol_feas ||
                xB_[i] > data_.upper[basis_[i]] + params_.tol_feas)
                return false;  // warm basis primal infeasible; restart cold
        }
        return true;
    }

    void ftran_(Vec& v) const {
        for (const auto& e : etas_) {
            const double t = v[e.row] / e.pivot;
            if (t != 0.0) {
                for (const auto& [i, val] : e.entries) v[i] -= val * t;
                v[e.row] = t;
            } else {
                v[e.row] = 0.0;
            }
        }
    }

    void btran_(Vec& y) const {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = 0.0;
            for (const auto& [i, val] : it->entries) s += y[i] * val;
            // entries include the pivot row; remove its contribution
            y[it->row] = (y[it->row] - (s - y[it->row] * it->pivot)) / it->pivot;
        }
    }

    void scatter_basis_column_(int p, Vec& dense) const {
        const int j = basis_[p];
        if (j < data_.n_struct) {
            for (int k = data_.col_start[j]; k < data_.col_start[j + 1]; ++k)
                dense[data_.col_row[k]] = data_.col_val[k];
        } else if (j < data_.n_struct + data_.n_logic) {
            dense[j - data_.n_struct] = 1.0;
        } else {
            const int r = j - data_.n_struct - data_.n_logic;
            dense[r] = art_sign_[r];
        }
    }

    /// Rebuilds the product-form inverse for the current basis; returns false
    /// when the basis is numerically singular.
    ///
    /// Row-singleton peeling comes first: a column pivoted on a row that no
    /// other remaining column touches is necessarily zero in all earlier
    /// pivot rows, so its eta is the column itself and generates no fill.
    /// Only the leftover bump goes through transformed pivoting.
    bool refactorize_() {
        const auto t_refac = std::chrono::steady_clock::now();
        ++stats_.refactor_count;
        etas_.clear();
        const int m = data_.m;
        std::vector<char> row_done(m, 0), col_done(m, 0);
        std::vector<int> new_basis(m, -1);
        int pivoted = 0;

        std::vector<int> row_count(m, 0);
        std::vector<std::vector<int>> row_to_positions(m);
        auto column_entries = [&](int p, auto&& fn) {
            const int j = basis_[p];
            if (j < data_.n_struct) {
                for (int k = data_.col_start[j]; k < data_.col_start[j + 1]; ++k)
                    fn(data_.col_row[k], data_.col_val[k]);
            } else if (j < data_.n_struct + data_.n_logic) {
                fn(j - data_.n_struct, 1.0);
            } else {
                const int r = j - data_.n_struct - data_.n_logic;
                fn(r, art_sign_[r]);
            }
        };
        for (int p = 0; p < m; ++p)
            column_entries(p, [&](int r, double) {
                ++row_count[r];
                row_to_positions[r].push_back(p);
            });

        // phase A: peel row singletons (no transformation, no fill)
        std::vector<int> queue;
        std::vector<char> row_deferred(m, 0);
        for (int r = 0; r < m; ++r)
            if (row_count[r] == 1) queue.push_back(r);
        while (!queue.empty()) {
            const int r = queue.back();
            queue.pop_back();
            if (row_done[r] || row_deferred[r] || row_count[r] != 1) continue;
            int p = -1;
            double pv = 0.0;
            for (int q : row_to_positions[r])
                if (!col_done[q]) {
                    column_entries(q, [&](int i, double v) {
                        if (i == r) pv = v;
                    });
                    p = q;
                    break;
                }
            if (p == -1) continue;
            if (std::abs(pv) < 1e-12) {
                row_deferred[r] = 1;  // numerically useless; leave to the bump
                continue;
            }
            detail::Eta eta;
            eta.row = r;
            eta.pivot = pv;
            column_entries(p, [&](int i, double v) { eta.entries.push_back({i, v}); });
            etas_.push_back(std::move(eta));
            row_done[r] = 1;
            col_done[p] = 1;
            new_basis[r] = basis_[p];
            ++pivoted;
            column_entries(p, [&](int i, double) {
                if (--row_count[i] == 1 && !row_done[i] && !row_deferred[i]) queue.push_back(i);
            });
        }

        // phase B: transformed pivoting over the bump, fewest-nonzeros first
        stats_.last_bump = static_cast<std::size_t>(m - pivoted);
        if (pivoted < m) {
            std::vector<int> count(m, 0);
            std::vector<std::vector<int>> buckets(m + 1);
            for (int p = 0; p < m; ++p) {
                if (col_done[p]) continue;
                int c = 0;
                column_entries(p, [&](int i, double) {
                    if (!row_done[i]) ++c;
                });
                count[p] = c;
                buckets[c].push_back(p);
            }
            Vec dense(m, 0.0);
            std::vector<int> deferred;
            int cursor = 0;

            auto try_pivot = [&](int p, double threshold) -> bool {
                scatter_basis_column_(p, dense);
                ftran_(dense);
                int pr = -1;
                double pv = 0.0;
                for (int i = 0; i < m; ++i)
                    if (!row_done[i] && std::abs(dense[i]) > std::abs(pv)) {
                        pv = dense[i];
                        pr = i;
                    }
                if (pr == -1 || std::abs(pv) < threshold) {
                    for (int i = 0; i < m; ++i) dense[i] = 0.0;
                    return false;
                }
                detail::Eta eta;
                eta.row = pr;
                eta.pivot = pv;
                for (int i = 0; i < m; ++i) {
                    if (dense[i] != 0.0) {
                        if (std::abs(dense[i]) > 1e-13 || i == pr)
                            eta.entries.push_back({i, dense[i]});
                        dense[i] = 0.0;
                    }
                }
                etas_.push_back(std::move(eta));
                row_done[pr] = 1;
                new_basis[pr] = basis_[p];
                col_done[p] = 1;
                ++pivoted;
                for (int q : row_to_positions[pr])
                    if (!col_done[q]) {
                        --count[q];
                        buckets[std::max(count[q], 0)].push_back(q);
                        cursor = std::min(cursor, std::max(count[q], 0));
                    }
                return true;
            };

            while (pivoted < m) {
                int pick = -1;
                while (cursor <= m) {
                    auto& bucket = buckets[cursor];
                    while (!bucket.empty()) {
                        const int p = bucket.back();
                        bucket.pop_back();
                        if (!col_done[p] && count[p] == cursor) {
                            pick = p;
                            break;
                        }
                    }
                    if (pick != -1) break;
                    ++cursor;
                }
                if (pick == -1) break;
                if (!try_pivot(pick, 1e-10)) deferred.push_back(pick);
            }
            bool progress = true;
            while (pivoted < m && progress) {
                progress = false;
                std::vector<int> still;
                for (int p : deferred)
                    if (!col_done[p]) {
                        if (try_pivot(p, 1e-12))
                            progress = true;
                        else
                            still.push_back(p);
                    }
                deferred = std::move(still);
            }
            if (pivoted < m) return false;
        }
        basis_ = new_basis;
        recompute_basics_();
        pivots_since_refactor_ = 0;
        stats_.last_eta_nnz = 0;
        for (const auto& e : etas_) stats_.last_eta_nnz += e.entries.size();
        stats_.refactor_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_refac).count();
        return true;
    }

    /// Largest bound violation over the basic variables.
    double basic_bound_violation_() const {
        double worst = 0.0;
        for (int i = 0; i < data_.m; ++i) {
            const int j = basis_[i];
            if (std::isfinite(data_.lower[j])) worst = std::max(worst, data_.lower[j] - xB_[i]);
            if (std::isfinite(data_.upper[j])) worst = std::max(worst, xB_[i] - data_.upper[j]);
        }
        return worst;
    }

    void recompute_basics_() {
        Vec r = data_.rhs;
        for (int j = 0; j < data_.n_total(); ++j) {
            if (status_[j] == VarStatus::Basic) continue;
            const double v = bound_value_(j);
            if (v == 0.0 || !std::isfinite(v)) continue;
            if (j < data_.n_struct) {
                for (int k = data_.col_start[j]; k < data_.col_start[j + 1]; ++k)
                    r[data_.col_row[k]] -= data_.col_val[k] * v;
            } else if (j < data_.n_struct + data_.n_logic) {
                r[j - data_.n_struct] -= v;
            } else {
                r[j - data_.n_struct - data_.n_logic] -= art_sign_[j - data_.n_struct - data_.n_logic] * v;
            }
        }
        ftran_(r);
        xB_ = r;
    }

    double phase_cost_(int j) const {
        if (phase_ == 1) return data_.is_artificial(j) ? -1.0 : 0.0;
        return data_.is_artificial(j) ? 0.0 : data_.obj[j];
    }

    double infeasibility_() const {
        double s = 0.0;
        for (int i = 0; i < data_.m; ++i)
            if (data_.is_artificial(basis_[i])) s += std::max(0.0, xB_[i]);
        return s;
    }

    std::size_t restart_count_ = 0;
    std::size_t refactor_cadence_ = 0;
    bool force_bland_ = false;

    /// Cold restart with a tighter refactorization cadence; the recovery
    /// path stays deterministic because every choice is parameter-driven.
    bool restart_() {
        if (++restart_count_ > 3) return false;
        refactor_cadence_ = std::max<std::size_t>(1, refactor_cadence_ / 8);
        if (restart_count_ >= 2) force_bland_ = true;
        cold_start_();
        bland_ = force_bland_;
        degen_streak_ = 0;
        return refactorize_();
    }

    LpSolution run_() {
        const int m = data_.m;
        work_.assign(m, 0.0);
        y_.assign(m, 0.0);
        refactor_cadence_ = params_.refactor_every;
        if (etas_.empty() && !refactorize_())
            throw NumericalBreakdown("initial basis failed to factorize");

        double bnorm = 1.0;
        for (double v : data_.rhs) bnorm += std::abs(v);
        const double feas_threshold = params_.tol_feas * bnorm;

        while (true) {
            if (iters_ >= params_.max_iters) return finish_(LpStatus::IterationLimit);
            if (pivots_since_refactor_ >= refactor_cadence_)
                if (!refactorize_()) {
                    if (!restart_()) throw NumericalBreakdown("basis refactorization failed");
                    continue;
                }

            // BTRAN with the phase cost of the basis
            for (int i = 0; i < m; ++i) y_[i] = phase_cost_(basis_[i]);
            btran_(y_);

            // pricing
            int enter = -1;
            double best_score = params_.tol_opt;
            const int n_price = data_.n_struct + data_.n_logic;  // artificials never re-enter
            for (int j = 0; j < n_price; ++j) {
                if (status_[j] == VarStatus::Basic) continue;
                if (data_.lower[j] == data_.upper[j]) continue;
                const double d = phase_cost_(j) - data_.dot_column(j, y_, 1.0);
                const bool eligible = status_[j] == VarStatus::AtLower ? d > params_.tol_opt
                                                                       : d < -params_.tol_opt;
                if (!eligible) continue;
                if (bland_) {
                    enter = j;
                    break;
                }
                if (std::abs(d) > best_score) {
                    best_score = std::abs(d);
                    enter = j;
                }
            }

            if (enter == -1) {
                // confirm on a fresh factorization before declaring the phase done
                if (pivots_since_refactor_ > 0) {
                    if (!refactorize_()) {
                        if (!restart_()) throw NumericalBreakdown("basis refactorization failed");
                    }
                    continue;
                }
                if (basic_bound_violation_() > feas_threshold) {
                    // drifted out of bounds; redo from a clean slate
                    if (!restart_()) throw NumericalBreakdown("primal feasibility lost");
                    continue;
                }
                if (phase_ == 1) {
                    if (infeasibility_() > feas_threshold) return finish_(LpStatus::Infeasible);
                    for (int i = 0; i < m; ++i) data_.upper[data_.artificial(i)] = 0.0;
                    phase_ = 2;
                    bland_ = force_bland_;
                    degen_streak_ = 0;
                    continue;
                }
                return finish_(LpStatus::Optimal);
            }

            // FTRAN of the entering column
            touched_.clear();
            data_.scatter_column(enter, 1.0, work_, touched_);
            ftran_(work_);

            const double dir = status_[enter] == VarStatus::AtLower ? 1.0 : -1.0;
            const double range = data_.upper[enter] - data_.lower[enter];

            // ratio test: two passes, preferring large pivots near the minimum
            double limit = std::isfinite(range) ? range : kInf;
            double min_ratio = limit;
            for (int i = 0; i < m; ++i) {
                const double wi = work_[i] * dir;
                if (std::abs(wi) < 1e-10) continue;
                const int bj = basis_[i];
                double room;
                if (wi > 0.0)
                    room = std::isfinite(data_.lower[bj]) ? (xB_[i] - data_.lower[bj]) / wi : kInf;
                else
                    room = std::isfinite(data_.upper[bj]) ? (xB_[i] - data_.upper[bj]) / wi : kInf;
                if (room < min_ratio) min_ratio = room;
            }
            if (!std::isfinite(min_ratio)) {
                if (phase_ == 1) throw NumericalBreakdown("phase-1 objective unbounded");
                return finish_(LpStatus::Unbounded);
            }
            double step = std::max(min_ratio, 0.0);

            int leave_row = -1;
            if (step < limit - 1e-12) {
                double best_pivot = 0.0;
                for (int i = 0; i < m; ++i) {
                    const double wi = work_[i] * dir;
                    if (std::abs(wi) < 1e-10) continue;
                    const int bj = basis_[i];
                    double room;
                    if (wi > 0.0)
                        room = std::isfinite(data_.lower[bj]) ? (xB_[i] - data_.lower[bj]) / wi : kInf;
                    else
                        room = std::isfinite(data_.upper[bj]) ? (xB_[i] - data_.upper[bj]) / wi : kInf;
                    if (room > step + 1e-9) continue;
                    if (bland_) {
                        // smallest basic column index among ties
                        if (leave_row == -1 || basis_[i] < basis_[leave_row]) leave_row = i;
                    } else if (std::abs(work_[i]) > std::abs(best_pivot)) {
                        best_pivot = work_[i];
                        leave_row = i;
                    }
                }
            }

            // update basic values
            if (step != 0.0)
                for (int i = 0; i < m; ++i)
                    if (work_[i] != 0.0) xB_[i] -= work_[i] * dir * step;

            if (leave_row == -1) {
                // bound flip: the entering variable crosses to its other bound
                status_[enter] =
                    status_[enter] == VarStatus::AtLower ? VarStatus::AtUpper : VarStatus::AtLower;
            } else {
                const int leave_col = basis_[leave_row];
                const double wi = work_[leave_row] * dir;
                status_[leave_col] = wi > 0.0 ? VarStatus::AtLower : VarStatus::AtUpper;
                if (!std::isfinite(data_.upper[leave_col]) && status_[leave_col] == VarStatus::AtUpper)
                    status_[leave_col] = VarStatus::AtLower;
                const double enter_val = bound_value_(enter) + dir * step;
                basis_[leave_row] = enter;
                status_[enter] = VarStatus::Basic;
                xB_[leave_row] = enter_val;

                detail::Eta eta;
                eta.row = leave_row;
                eta.pivot = work_[leave_row];
                for (int i = 0; i < m; ++i)
                    if (work_[i] != 0.0 && (std::abs(work_[i]) > 1e-13 || i == leave_row))
                        eta.entries.push_back({i, work_[i]});
                etas_.push_back(std::move(eta));
                ++pivots_since_refactor_;
            }

            for (int i = 0; i < m; ++i) work_[i] = 0.0;

            ++iters_;
            if (step <= 1e-12) {
                if (++degen_streak_ >= params_.bland_after) bland_ = true;
            } else {
                degen_streak_ = 0;
                bland_ = force_bland_;
            }
        }
    }

    LpSolution finish_(LpStatus status) {
        LpSolution sol;
        sol.status = status;
        sol.iterations = iters_;
        sol.x.assign(data_.n_struct, 0.0);
        for (int j = 0; j < data_.n_struct; ++j)
            if (status_[j] != VarStatus::Basic) sol.x[j] = bound_value_(j);
        for (int i = 0; i < data_.m; ++i)
            if (basis_[i] < data_.n_struct) sol.x[basis_[i]] = xB_[i];
        for (int j = 0; j < data_.n_struct; ++j) sol.objective += data_.obj[j] * sol.x[j];

        // row residuals in the original model space (logicals absorb slack)
        Vec act(data_.m, 0.0);
        for (int j = 0; j < data_.n_struct; ++j) {
            const double v = sol.x[j];
            if (v == 0.0) continue;
            for (int k = data_.col_start[j]; k < data_.col_start[j + 1]; ++k)
                act[data_.col_row[k]] += data_.col_val[k] * v;
        }
        double resid = 0.0;
        for (int i = 0; i < data_.m; ++i) {
            const int lj = data_.n_struct + i;
            const double slack_lo = data_.lower[lj], slack_hi = data_.upper[lj];
            const double s = data_.rhs[i] - act[i];
            double v = 0.0;
            if (std::isfinite(slack_hi) && s > slack_hi) v = s - slack_hi;
            if (std::isfinite(slack_lo) && s < slack_lo) v = std::max(v, slack_lo - s);
            resid = std::max(resid, v);
        }
        for (int j = 0; j < data_.n_struct; ++j) {
            if (std::isfinite(data_.lower[j])) resid = std::max(resid, data_.lower[j] - sol.x[j]);
            if (std::isfinite(data_.upper[j])) resid = std::max(resid, sol.x[j] - data_.upper[j]);
        }
        sol.feas_residual = resid;
        return sol;
    }

  public:
    const LpRunStats& run_stats() const { return stats_; }

    /// Exposes the final basis so callers may reuse it as a warm start.
    LpBasis basis_snapshot() const {
        LpBasis out(data_.n_struct + data_.n_logic, VarStatus::AtLower);
        for (int j = 0; j < data_.n_struct + data_.n_logic; ++j) out[j] = status_[j];
        return out;
    }
};

inline LpSolution solve_lp(const LpModel& model, const LpParams& params = {},
                           const std::vector<BoundFix>* fixes = nullptr,
                           const LpBasis* warm = nullptr) {
    SimplexSolver solver(model, params, fixes);
    return solver.solve(warm);
}

}  // namespace pomdpml
