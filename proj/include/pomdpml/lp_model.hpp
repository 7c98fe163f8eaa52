#pragma once
// Sparse linear / mixed-integer model container shared by the formulation
// builder, the simplex solver, branch-and-bound and the MPS writer.

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pomdpml/model.hpp"

namespace pomdpml {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { Equal, LessEqual, GreaterEqual };

struct LpColumn {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    bool integral = false;
};

struct LpRow {
    std::string name;
    std::vector<std::pair<int, double>> coeffs;  // (column, coefficient)
    RowSense sense = RowSense::Equal;
    double rhs = 0.0;
};

/**
 * Column map of the memoryless moment model. Layout is time-major: for each
 * stage t = 0..T the blocks [mu_s | mu_sa | mu_soa | delta], then mu_s^{T+1},
 * then (with cuts) one extended block per stage t = 1..T ordered
 * (s',a',s,o,a).
 */
struct VariableIndex {
    int S = 0, A = 0, O = 0, T = 0;
    bool cuts = false;

    int stage_block() const { return S + S * A + S * O * A + O * A; }
    int ext_block() const { return S * A * S * O * A; }

    int mu_s(int t, int s) const {
        if (t == T + 1) return (T + 1) * stage_block() + s;
        return t * stage_block() + s;
    }
    int mu_sa(int t, int s, int a) const { return t * stage_block() + S + s * A + a; }
    int mu_soa(int t, int s, int o, int a) const {
        return t * stage_block() + S + S * A + (s * O + o) * A + a;
    }
    int delta(int t, int o, int a) const {
        return t * stage_block() + S + S * A + S * O * A + o * A + a;
    }
    int ext(int t, int sp, int ap, int s, int o, int a) const {
        const int base = (T + 1) * stage_block() + S;
        return base + (t - 1) * ext_block() + ((((sp * A + ap) * S + s) * O + o) * A + a);
    }

    int n_cols() const {
        return (T + 1) * stage_block() + S + (cuts ? T * ext_block() : 0);
    }

    bool is_delta(int col) const {
        if (col >= (T + 1) * stage_block() + S) return false;
        const int within = col % stage_block();
        return within >= S + S * A + S * O * A;
    }
};

struct LpModel {
    std::vector<LpColumn> cols;
    std::vector<LpRow> rows;
    Vec objective;  // one coefficient per column; sense is maximize
    VariableIndex index;

    int n_cols() const { return static_cast<int>(cols.size()); }
    int n_rows() const { return static_cast<int>(rows.size()); }

    int add_col(std::string name, double lower, double upper, bool integral = false) {
        cols.push_back({std::move(name), lower, upper, integral});
        objective.push_back(0.0);
        return n_cols() - 1;
    }

    LpRow& add_row(std::string name, RowSense sense, double rhs) {
        rows.push_back({std::move(name), {}, sense, rhs});
        return rows.back();
    }

    std::size_t nonzeros() const {
        std::size_t nnz = 0;
        for (const auto& r : rows) nnz += r.coeffs.size();
        return nnz;
    }
};

}  // namespace pomdpml
