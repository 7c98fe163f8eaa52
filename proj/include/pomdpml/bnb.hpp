#pragma once
// Branch-and-bound over the binary policy columns of a memoryless moment
// model. Nodes bound through the LP relaxation; incumbents come from
// integral LP points and from rounding the node solution, both scored by
// the exact moment-recursion evaluator, never by the LP objective.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include "pomdpml/formulate.hpp"
#include "pomdpml/lp.hpp"
#include "pomdpml/lp_model.hpp"
#include "pomdpml/policy.hpp"

namespace pomdpml {

enum class MilpStatus { Optimal, GapLimit, TimeLimit, NodeLimit, Infeasible };

inline const char* to_string(MilpStatus s) {
    switch (s) {
        case MilpStatus::Optimal: return "Optimal";
        case MilpStatus::GapLimit: return "GapLimit";
        case MilpStatus::TimeLimit: return "TimeLimit";
        case MilpStatus::NodeLimit: return "NodeLimit";
        case MilpStatus::Infeasible: return "Infeasible";
    }
    return "?";
}

struct MilpParams {
    double gap_tol = 1e-6;
    double time_limit_seconds = std::numeric_limits<double>::infinity();
    std::size_t node_limit = std::numeric_limits<std::size_t>::max();
    LpParams lp;
    std::ostream* log = nullptr;
    std::size_t log_every = 500;
};

struct MilpResult {
    MilpStatus status = MilpStatus::Infeasible;
    bool has_incumbent = false;
    MemorylessPolicy incumbent_policy;
    double incumbent = -std::numeric_limits<double>::infinity();
    double bound = std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    std::size_t nodes = 0;
    double wall_seconds = 0.0;

    static double relative_gap(double incumbent, double bound) {
        return (bound - incumbent) / std::max(std::abs(bound), 1e-12);
    }
};

namespace detail {

struct BnbNode {
    double bound;
    int depth;
    std::size_t id;
    std::vector<BoundFix> fixes;
};

struct NodeOrder {
    // max-heap: best bound first, then deeper, then first-created
    bool operator()(const BnbNode& a, const BnbNode& b) const {
        if (a.bound != b.bound) return a.bound < b.bound;
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.id > b.id;
    }
};

/// Deterministic policy from a node's delta values: per-stage argmax with
/// lowest action index on ties; stage 0 reads the first observation row.
inline MemorylessPolicy round_policy(const LpModel& model, const Vec& x) {
    const VariableIndex& ix = model.index;
    std::vector<std::vector<std::size_t>> tail;
    std::size_t a0 = 0;
    {
        double best = -1.0;
        for (int a = 0; a < ix.A; ++a) {
            const double v = x[ix.delta(0, 0, a)];
            if (v > best + 1e-12) {
                best = v;
                a0 = static_cast<std::size_t>(a);
            }
        }
    }
    for (int t = 1; t <= ix.T; ++t) {
        std::vector<std::size_t> stage(ix.O, 0);
        for (int o = 0; o < ix.O; ++o) {
            double best = -1.0;
            for (int a = 0; a < ix.A; ++a) {
                const double v = x[ix.delta(t, o, a)];
                if (v > best + 1e-12) {
                    best = v;
                    stage[o] = static_cast<std::size_t>(a);
                }
            }
        }
        tail.push_back(std::move(stage));
    }
    return MemorylessPolicy::make_deterministic(ix.O, ix.A, a0, tail);
}

}  // namespace detail

/**
 * Solves the memoryless MILP by best-first branch-and-bound on the binary
 * policy columns. Branching picks the most fractional delta (ties: earliest
 * stage, then observation/action order); fixing a delta to one also fixes
 * its simplex-row siblings to zero. Deterministic for identical inputs.
 */
inline MilpResult solve_milp(const LpModel& model, const PomdpInstance& instance,
                             const RewardSpec& rewards, const MilpParams& params = {}) {
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    std::vector<int> binary_cols;
    for (int j = 0; j < model.n_cols(); ++j)
        if (model.cols[j].integral) binary_cols.push_back(j);
    if (binary_cols.empty()) throw Error("solve_milp: model has no binary columns");

    MilpResult result;
    const VariableIndex& ix = model.index;

    auto offer_incumbent = [&](const MemorylessPolicy& pol) {
        const double v = evaluate_exact(instance, pol, rewards).value;
        if (!result.has_incumbent || v > result.incumbent) {
            result.has_incumbent = true;
            result.incumbent = v;
            result.incumbent_policy = pol;
        }
    };

    std::priority_queue<detail::BnbNode, std::vector<detail::BnbNode>, detail::NodeOrder> open;
    open.push({std::numeric_limits<double>::infinity(), 0, 0, {}});
    std::size_t next_id = 1;
    double pruned_bound_max = -std::numeric_limits<double>::infinity();
    bool root_infeasible = false;

    auto prune_threshold = [&] {
        if (!result.has_incumbent) return -std::numeric_limits<double>::infinity();
        return result.incumbent + params.gap_tol * std::max(1.0, std::abs(result.incumbent));
    };

    MilpStatus exit_status = MilpStatus::Optimal;
    while (!open.empty()) {
        if (result.nodes > 0) {
            if (elapsed() > params.time_limit_seconds) {
                exit_status = MilpStatus::TimeLimit;
                break;
            }
            if (result.nodes >= params.node_limit) {
                exit_status = MilpStatus::NodeLimit;
                break;
            }
        }
        detail::BnbNode node = open.top();
        open.pop();
        if (node.bound <= prune_threshold()) {
            pruned_bound_max = std::max(pruned_bound_max, node.bound);
            continue;
        }

        LpSolution lp = solve_lp(model, params.lp, &node.fixes);
        ++result.nodes;
        if (lp.status == LpStatus::Infeasible) {
            if (node.id == 0) root_infeasible = true;
            continue;
        }
        if (lp.status != LpStatus::Optimal)
            throw NumericalBreakdown("node " + std::to_string(node.id) + " LP ended " +
                                     std::string(to_string(lp.status)));
        const double node_bound = std::min(lp.objective, node.bound);
        if (node_bound <= prune_threshold()) {
            pruned_bound_max = std::max(pruned_bound_max, node_bound);
            continue;
        }

        // most fractional binary column
        int branch_col = -1;
        double best_frac = 1e-6;
        for (int j : binary_cols) {
            const double v = lp.x[j];
            const double frac = std::min(v, 1.0 - v);
            if (frac > best_frac) {
                best_frac = frac;
                branch_col = j;
            }
        }

        if (branch_col == -1) {
            offer_incumbent(detail::round_policy(model, lp.x));
            pruned_bound_max = std::max(pruned_bound_max, node_bound);
            continue;
        }

        offer_incumbent(detail::round_policy(model, lp.x));

        // children: fix to one (plus zero siblings), then fix to zero
        const auto ref = [&] {
            const int block = ix.stage_block();
            const int t = branch_col / block;
            const int within = branch_col % block - (ix.S + ix.S * ix.A + ix.S * ix.O * ix.A);
            return std::tuple<int, int, int>{t, within / ix.A, within % ix.A};
        }();
        {
            detail::BnbNode child{node_bound, node.depth + 1, next_id++, node.fixes};
            child.fixes.push_back({branch_col, 1.0, 1.0});
            const auto [t, o, a] = ref;
            for (int ao = 0; ao < ix.A; ++ao)
                if (ao != a) child.fixes.push_back({ix.delta(t, o, ao), 0.0, 0.0});
            open.push(std::move(child));
        }
        {
            detail::BnbNode child{node_bound, node.depth + 1, next_id++, node.fixes};
            child.fixes.push_back({branch_col, 0.0, 0.0});
            open.push(std::move(child));
        }

        if (params.log && result.nodes % params.log_every == 0) {
            const double b = std::max({result.incumbent, node_bound,
                                       open.empty() ? -std::numeric_limits<double>::infinity()
                                                    : open.top().bound});
            (*params.log) << "node=" << result.nodes << " bound=" << b
                          << " incumbent=" << result.incumbent
                          << " gap=" << MilpResult::relative_gap(result.incumbent, b) << "\n";
        }
    }

    double open_max = -std::numeric_limits<double>::infinity();
    while (!open.empty()) {
        open_max = std::max(open_max, open.top().bound);
        open.pop();
    }

    if (!result.has_incumbent && root_infeasible) {
        result.status = MilpStatus::Infeasible;
        result.bound = -std::numeric_limits<double>::infinity();
        result.wall_seconds = elapsed();
        return result;
    }

    if (exit_status == MilpStatus::Optimal) {
        // everything pruned at the gap tolerance
        result.bound = std::max(result.incumbent, pruned_bound_max);
    } else {
        result.bound = std::max({result.incumbent, pruned_bound_max, open_max});
    }
    result.status = exit_status;
    result.gap = MilpResult::relative_gap(result.incumbent, result.bound);
    result.wall_seconds = elapsed();
    return result;
}

}  // namespace pomdpml
