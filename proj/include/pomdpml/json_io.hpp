#pragma once
// Versioned JSON renderings of the library's report types. Field order is
// fixed (insertion order) so identical runs serialize byte-identically;
// wall-clock fields are emitted only on request.

#include <optional>
#include <string>

#include <json.hpp>

#include "pomdpml/bnb.hpp"
#include "pomdpml/model.hpp"
#include "pomdpml/policy.hpp"
#include "pomdpml/sim.hpp"

namespace pomdpml {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "v1";

inline Json info_to_json(const PomdpInstance& m, const std::string& name) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "instance_info";
    j["name"] = name;
    j["states"] = m.n_states();
    j["observations"] = m.n_observations();
    j["actions"] = m.n_actions();
    j["sparsity_percent"] = 100.0 * sparsity(m);
    j["discount"] = m.discount;
    j["action_dependent_emission"] = m.action_dependent_raw;
    return j;
}

inline Json policy_to_json(const MemorylessPolicy& p, const std::vector<std::string>& action_names) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "policy";
    j["horizon"] = p.horizon();
    j["deterministic"] = p.deterministic;
    if (p.deterministic) {
        Json stages = Json::array();
        for (int t = 0; t <= p.horizon(); ++t) {
            Json per_obs = Json::array();
            for (std::size_t o = 0; o < p.n_observations(); ++o)
                per_obs.push_back(action_names[p.mode_action(t, o)]);
            stages.push_back(std::move(per_obs));
        }
        j["actions"] = std::move(stages);
    } else {
        Json stages = Json::array();
        for (int t = 0; t <= p.horizon(); ++t) {
            Json per_obs = Json::array();
            for (std::size_t o = 0; o < p.n_observations(); ++o) {
                Json row = Json::array();
                for (std::size_t a = 0; a < p.n_actions(); ++a) row.push_back(p.delta[t](o, a));
                per_obs.push_back(std::move(row));
            }
            stages.push_back(std::move(per_obs));
        }
        j["probs"] = std::move(stages);
    }
    return j;
}

inline Json milp_result_to_json(const MilpResult& r, bool with_timing = false) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "milp_result";
    j["status"] = to_string(r.status);
    j["has_incumbent"] = r.has_incumbent;
    if (r.has_incumbent) j["incumbent"] = r.incumbent;
    j["bound"] = r.bound;
    j["gap"] = r.gap;
    j["nodes"] = r.nodes;
    if (with_timing) j["wall_seconds"] = r.wall_seconds;
    return j;
}

inline Json eval_report_to_json(const EvalReport& r, bool with_timing = false) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "eval_report";
    j["mean"] = r.mean;
    j["stderr"] = r.stderr_of_mean;
    j["truncation_bias_bound"] = r.truncation_bias_bound;
    j["cached_fraction"] = r.cached_fraction;
    j["unproven_solves"] = r.unproven_solves;
    j["n_sims"] = r.n_sims;
    j["steps"] = r.steps;
    j["seed"] = r.seed;
    if (with_timing) j["per_action_seconds"] = r.per_action_seconds;
    return j;
}

inline Json bounds_report_to_json(const BoundsReport& r) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "bounds_report";
    Json per_h = Json::array();
    for (std::size_t i = 0; i < r.horizons.size(); ++i) {
        Json row;
        row["horizon"] = r.horizons[i];
        row["w_ml"] = r.w_ml[i];
        row["z_Rc"] = r.z_rc[i];
        row["z_R"] = r.z_r[i];
        row["milp_status"] = to_string(r.milp_status[i]);
        per_h.push_back(std::move(row));
    }
    j["plain"] = std::move(per_h);
    j["t_ub"] = r.t_ub;
    j["z_tilde_Rc_tub"] = r.z_tilde_rc_tub;
    j["z_tilde_R0"] = r.z_tilde_r0;
    if (!r.z_tilde_r_grid.empty()) {
        j["z_tilde_R_grid"] = r.z_tilde_r_grid;
        j["z_tilde_Rc_grid"] = r.z_tilde_rc_grid;
    }
    j["defects"] = r.defects;
    return j;
}

inline Json gap_metric_to_json(const GapMetric& g) {
    Json j;
    j["defined"] = g.defined;
    if (g.defined) {
        j["raw"] = g.raw;
        j["percent"] = g.percent_1dp();
    }
    return j;
}

inline Json gap_report_to_json(const GapReport& r, const std::vector<int>& horizons) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "gap_report";
    Json per_h = Json::array();
    for (std::size_t i = 0; i < r.memoryless_gap.size(); ++i) {
        Json row;
        row["horizon"] = i < horizons.size() ? horizons[i] : -1;
        row["G_w_ml"] = gap_metric_to_json(r.memoryless_gap[i]);
        per_h.push_back(std::move(row));
    }
    j["memoryless_gap"] = std::move(per_h);
    j["controller_gap"] = gap_metric_to_json(r.controller_gap);
    j["upper_bound_improvement"] = gap_metric_to_json(r.upper_bound_improvement);
    return j;
}

}  // namespace pomdpml
