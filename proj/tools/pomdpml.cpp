// Command-line front end: parse -> formulate -> solve -> simulate -> report.
//
//   pomdpml info <instance>
//   pomdpml solve-ml <instance> --horizon T [--tilde] [--relax] ...
//   pomdpml bounds <instance> [--horizons 1,2,3,4] [--tub 100] ...
//   pomdpml smf <instance> [--rolling 2] [--sims 1000] [--steps 100] ...
//   pomdpml export <instance> --horizon T -o model.mps ...
//   pomdpml fetch <name> [--cache-dir DIR] [--base-url URL]
//
// <instance> is a file path, the name of a bundled benchmark, or a name
// resolvable through the download cache ($POMDP_CACHE_DIR).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pomdpml/fetch.hpp"
#include "pomdpml/pomdpml.hpp"

namespace fs = std::filesystem;
using namespace pomdpml;

namespace {

fs::path resolve_instance(const std::string& arg) {
    if (fs::exists(arg)) return arg;
    if (arg.find('/') == std::string::npos) {
        const fs::path bundled = fs::path(POMDPML_BENCH_DIR) / (arg + ".pomdp");
        if (fs::exists(bundled)) return bundled;
        return fetch_and_cache(arg, default_cache_dir());
    }
    throw Error("no such instance file: " + arg);
}

PomdpInstance load_instance(const std::string& arg, std::optional<double> gamma) {
    const fs::path path = resolve_instance(arg);
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    PomdpInstance m = parse_pomdp(in);
    if (gamma) {
        if (!(*gamma > 0.0 && *gamma <= 1.0)) throw Error("--gamma must lie in (0,1]");
        m.discount = *gamma;
    }
    return m;
}

void write_json(const std::optional<std::string>& path, const Json& doc) {
    if (!path) return;
    std::ofstream out(*path, std::ios::trunc);
    out << doc.dump(2) << "\n";
}

struct CommonOpts {
    std::string instance;
    std::optional<double> gamma;
    std::optional<std::string> json_path;
    bool emit_timing = false;
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("instance", o.instance, "instance file or benchmark name")->required();
    cmd->add_option("--gamma", o.gamma, "override the file discount");
    cmd->add_option("--json", o.json_path, "write a JSON report to this path");
    cmd->add_flag("--emit-timing", o.emit_timing, "include wall-clock fields in JSON output");
    cmd->add_flag("-v,--verbose", o.verbose, "progress logging to stderr");
}

MilpParams milp_params(double gap_tol, double time_limit, std::size_t node_limit, bool verbose) {
    MilpParams p;
    p.gap_tol = gap_tol;
    if (time_limit > 0.0) p.time_limit_seconds = time_limit;
    if (node_limit > 0) p.node_limit = node_limit;
    if (verbose) p.log = &std::cerr;
    return p;
}

int cmd_info(const CommonOpts& o) {
    const auto m = load_instance(o.instance, o.gamma);
    const auto rep = validate(m);
    std::printf("%-12s |S|=%zu |O|=%zu |A|=%zu sparsity=%.1f%%\n", o.instance.c_str(),
                m.n_states(), m.n_observations(), m.n_actions(), 100.0 * sparsity(m));
    if (!rep.ok())
        for (const auto& issue : rep.issues) std::printf("  invalid: %s\n", issue.c_str());
    Json j = info_to_json(m, o.instance);
    j["valid"] = rep.ok();
    write_json(o.json_path, j);
    return rep.ok() ? 0 : 2;
}

RewardSpec make_rewards(const PomdpInstance& m, int T, bool tilde) {
    if (!tilde) return RewardSpec::plain(m, T);
    if (m.discount >= 1.0) throw Error("--tilde needs a discount below one");
    const auto tail = solve_mdp_infinite(m);
    return RewardSpec::tilde(m, T, tail.values, m.discount);
}

int cmd_solve_ml(const CommonOpts& o, int horizon, bool tilde, bool cuts, bool relax,
                 double gap_tol, double time_limit, std::size_t node_limit,
                 const std::optional<std::string>& policy_out) {
    const auto m = load_instance(o.instance, o.gamma);
    const auto rewards = make_rewards(m, horizon, tilde);
    const auto model = build_memoryless_model(m, rewards, {.cuts = cuts, .integral = !relax});

    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "solve_ml";
    j["instance"] = o.instance;
    j["horizon"] = horizon;
    j["tilde"] = tilde;
    j["cuts"] = cuts;

    if (relax) {
        const auto sol = solve_lp(model);
        std::printf("relaxation %s: value=%.9g iterations=%zu\n", to_string(sol.status),
                    sol.objective, sol.iterations);
        j["relaxation"] = Json{{"status", to_string(sol.status)}, {"value", sol.objective}};
        write_json(o.json_path, j);
        return sol.status == LpStatus::Optimal ? 0 : 2;
    }

    const auto res = solve_milp(model, m, rewards,
                                milp_params(gap_tol, time_limit, node_limit, o.verbose));
    std::printf("milp %s: incumbent=%.9g bound=%.9g gap=%.3g nodes=%zu\n",
                to_string(res.status), res.incumbent, res.bound, res.gap, res.nodes);
    j["milp"] = milp_result_to_json(res, o.emit_timing);
    if (res.has_incumbent) {
        const Json pol = policy_to_json(res.incumbent_policy, m.actions);
        j["policy"] = pol;
        if (policy_out) {
            std::ofstream out(*policy_out, std::ios::trunc);
            out << pol.dump(2) << "\n";
        }
    }
    write_json(o.json_path, j);
    return res.has_incumbent ? 0 : 2;
}

int cmd_bounds(const CommonOpts& o, std::vector<int> horizons, int t_ub, bool tilde_grid,
               double gap_tol, double time_limit, std::size_t node_limit) {
    const auto m = load_instance(o.instance, o.gamma);
    BoundSuiteOptions opt;
    opt.tilde = m.discount < 1.0;
    opt.tilde_grid = tilde_grid && opt.tilde;
    opt.milp = milp_params(gap_tol, time_limit, node_limit, o.verbose);
    const auto bounds = compute_bound_suite(m, horizons, t_ub, opt);
    const auto gaps = compute_gaps(bounds);

    std::printf("%-4s %14s %14s %14s %10s %10s\n", "T", "w_ml", "z_Rc", "z_R", "status",
                "G(w_ml)%");
    for (std::size_t i = 0; i < bounds.horizons.size(); ++i)
        std::printf("%-4d %14.6f %14.6f %14.6f %10s %10.1f\n", bounds.horizons[i], bounds.w_ml[i],
                    bounds.z_rc[i], bounds.z_r[i], to_string(bounds.milp_status[i]),
                    gaps.memoryless_gap[i].defined ? gaps.memoryless_gap[i].percent_1dp() : -1.0);
    if (opt.tilde) {
        std::printf("tilde: z_R0=%.6f z_Rc(T_ub=%d)=%.6f", bounds.z_tilde_r0, t_ub,
                    bounds.z_tilde_rc_tub);
        if (gaps.upper_bound_improvement.defined)
            std::printf(" G_ub=%.1f%%", gaps.upper_bound_improvement.percent_1dp());
        std::printf("\n");
    }
    for (const auto& defect : bounds.defects) std::printf("DEFECT: %s\n", defect.c_str());

    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "bounds";
    j["instance"] = o.instance;
    j["bounds"] = bounds_report_to_json(bounds);
    j["gaps"] = gap_report_to_json(gaps, bounds.horizons);
    write_json(o.json_path, j);
    return bounds.ok() ? 0 : 2;
}

int cmd_smf(const CommonOpts& o, int rolling, int t_ub, std::size_t sims, std::size_t steps,
            std::uint64_t seed, bool cuts, double gap_tol, double time_limit,
            std::size_t node_limit, bool skip_bounds) {
    const auto m = load_instance(o.instance, o.gamma);
    if (m.discount >= 1.0) throw Error("the rolling-horizon controller needs a discount below one");

    const auto tail = solve_mdp_infinite(m);
    SmfParams params;
    params.rolling_horizon = rolling;
    params.cuts = cuts;
    params.milp = milp_params(gap_tol, time_limit, node_limit, false);
    SmfController controller(m, tail, params);

    SimConfig cfg;
    cfg.n_sims = sims;
    cfg.steps = steps;
    cfg.seed = seed;
    const auto eval = simulate_controller(m, controller, cfg);

    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "smf";
    j["instance"] = o.instance;
    j["rolling_horizon"] = rolling;
    j["t_ub"] = t_ub;
    j["eval"] = eval_report_to_json(eval, o.emit_timing);

    std::printf("smf(T=%d) on %s: mean=%.4f stderr=%.4f cached=%.1f%% unproven=%zu\n", rolling,
                o.instance.c_str(), eval.mean, eval.stderr_of_mean, 100.0 * eval.cached_fraction,
                eval.unproven_solves);

    bool defects = false;
    if (!skip_bounds) {
        BoundSuiteOptions opt;
        opt.milp = params.milp;
        const auto bounds = compute_bound_suite(m, {}, t_ub, opt);
        const auto gaps = compute_gaps(bounds, eval.mean);
        if (gaps.controller_gap.defined)
            std::printf("G^%d = %.1f%%  (z_Rc^%d = %.6f)\n", t_ub,
                        gaps.controller_gap.percent_1dp(), t_ub, bounds.z_tilde_rc_tub);
        if (gaps.upper_bound_improvement.defined)
            std::printf("G_ub^%d = %.1f%%  (z_R^0 = %.6f)\n", t_ub,
                        gaps.upper_bound_improvement.percent_1dp(), bounds.z_tilde_r0);
        j["bounds"] = bounds_report_to_json(bounds);
        j["gaps"] = gap_report_to_json(gaps, {});
        defects = !bounds.ok();
    }
    write_json(o.json_path, j);
    return defects ? 2 : 0;
}

int cmd_export(const CommonOpts& o, int horizon, bool tilde, bool cuts, bool integral,
               const std::string& out_path) {
    const auto m = load_instance(o.instance, o.gamma);
    const auto rewards = make_rewards(m, horizon, tilde);
    const auto model = build_memoryless_model(m, rewards, {.cuts = cuts, .integral = integral});
    const auto exported = export_mps(model);
    {
        std::ofstream out(out_path, std::ios::trunc);
        out << exported.mps;
    }
    const std::string sidecar_path = out_path + ".names.json";
    {
        std::ofstream out(sidecar_path, std::ios::trunc);
        out << exported.sidecar_json;
    }
    std::printf("wrote %s (%d rows, %d cols) and %s\n", out_path.c_str(), model.n_rows(),
                model.n_cols(), sidecar_path.c_str());
    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "export";
    j["mps"] = out_path;
    j["sidecar"] = sidecar_path;
    j["rows"] = model.n_rows();
    j["cols"] = model.n_cols();
    write_json(o.json_path, j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"memoryless POMDP policies, relaxation bounds and the rolling-horizon controller"};
    app.require_subcommand(1);

    CommonOpts info_o, solve_o, bounds_o, smf_o, export_o;

    auto* info = app.add_subcommand("info", "instance sizes and sparsity");
    add_common(info, info_o);

    auto* solve = app.add_subcommand("solve-ml", "optimal memoryless policy by MILP");
    add_common(solve, solve_o);
    int solve_T = 2;
    bool solve_tilde = false, solve_relax = false;
    bool solve_cuts = true;
    double solve_gap = 1e-6, solve_time = 0.0;
    std::size_t solve_nodes = 0;
    std::optional<std::string> solve_policy_out;
    solve->add_option("--horizon", solve_T, "decision stages after the initial one");
    solve->add_flag("--tilde", solve_tilde, "discounted rewards with the tail value folded in");
    solve->add_flag("--cuts,!--no-cuts", solve_cuts, "extended one-step-memory rows");
    solve->add_flag("--relax", solve_relax, "solve the linear relaxation only");
    solve->add_flag("--integral", [](std::int64_t) {}, "solve as a MILP (the default)");
    solve->add_option("--gap-tol", solve_gap, "relative optimality gap");
    solve->add_option("--time-limit", solve_time, "seconds");
    solve->add_option("--node-limit", solve_nodes, "node budget");
    solve->add_option("--policy-out", solve_policy_out, "write the policy JSON here");

    auto* bounds = app.add_subcommand("bounds", "memoryless value and relaxation bounds");
    add_common(bounds, bounds_o);
    std::vector<int> bounds_T = {1, 2, 3, 4};
    int bounds_tub = 100;
    bool bounds_grid = false;
    double bounds_gap = 1e-6, bounds_time = 0.0;
    std::size_t bounds_nodes = 0;
    bounds->add_option("--horizons", bounds_T, "horizon grid")->delimiter(',');
    bounds->add_option("--tub", bounds_tub, "horizon for the tail-closed bound");
    bounds->add_flag("--tilde-grid", bounds_grid, "tail-closed bounds on the whole grid");
    bounds->add_option("--gap-tol", bounds_gap, "relative optimality gap");
    bounds->add_option("--time-limit", bounds_time, "seconds per MILP");
    bounds->add_option("--node-limit", bounds_nodes, "node budget per MILP");

    auto* smf = app.add_subcommand("smf", "simulate the rolling-horizon controller");
    add_common(smf, smf_o);
    int smf_rolling = 2, smf_tub = 100;
    std::size_t smf_sims = 1000, smf_steps = 100, smf_nodes = 0;
    std::uint64_t smf_seed = 0;
    bool smf_cuts = true, smf_skip_bounds = false;
    double smf_gap = 1e-6, smf_time = 0.0;
    std::string smf_preset;
    smf->add_option("--rolling", smf_rolling, "rolling horizon of the inner solves");
    smf->add_option("--tub", smf_tub, "horizon for the quality bound");
    smf->add_option("--sims", smf_sims, "trajectory count");
    smf->add_option("--steps", smf_steps, "steps per trajectory");
    smf->add_option("--seed", smf_seed, "simulation seed");
    smf->add_flag("--cuts,!--no-cuts", smf_cuts, "extended rows in the inner solves");
    smf->add_flag("--skip-bounds", smf_skip_bounds, "report the simulation only");
    smf->add_option("--gap-tol", smf_gap, "relative optimality gap of inner solves");
    smf->add_option("--time-limit", smf_time, "seconds per inner solve");
    smf->add_option("--node-limit", smf_nodes, "node budget per inner solve");
    smf->add_option("--preset", smf_preset, "'desk' shrinks sims to 200 and tub to 20")
        ->check(CLI::IsMember({"desk"}));

    auto* exp = app.add_subcommand("export", "write the model as fixed-format MPS");
    add_common(exp, export_o);
    int export_T = 2;
    bool export_tilde = false, export_cuts = false, export_integral = false;
    std::string export_out = "model.mps";
    exp->add_option("--horizon", export_T, "decision stages after the initial one");
    exp->add_flag("--tilde", export_tilde, "discounted rewards with the tail folded in");
    exp->add_flag("--cuts", export_cuts, "extended one-step-memory rows");
    exp->add_flag("--integral", export_integral, "binary policy columns");
    exp->add_option("-o,--out", export_out, "output path");

    auto* fetch = app.add_subcommand("fetch", "download a named instance into the cache");
    std::string fetch_name, fetch_base;
    std::string fetch_dir = default_cache_dir().string();
    fetch->add_option("name", fetch_name, "instance name")->required();
    fetch->add_option("--cache-dir", fetch_dir, "cache directory");
    fetch->add_option("--base-url", fetch_base, "download base URL");

    CLI11_PARSE(app, argc, argv);

    try {
        if (info->parsed()) return cmd_info(info_o);
        if (solve->parsed())
            return cmd_solve_ml(solve_o, solve_T, solve_tilde, solve_cuts, solve_relax, solve_gap,
                                solve_time, solve_nodes, solve_policy_out);
        if (bounds->parsed())
            return cmd_bounds(bounds_o, bounds_T, bounds_tub, bounds_grid, bounds_gap, bounds_time,
                              bounds_nodes);
        if (smf->parsed()) {
            if (smf_preset == "desk") {
                if (smf->count("--sims") == 0) smf_sims = 200;
                if (smf->count("--tub") == 0) smf_tub = 20;
            }
            return cmd_smf(smf_o, smf_rolling, smf_tub, smf_sims, smf_steps, smf_seed, smf_cuts,
                           smf_gap, smf_time, smf_nodes, smf_skip_bounds);
        }
        if (exp->parsed())
            return cmd_export(export_o, export_T, export_tilde, export_cuts, export_integral,
                              export_out);
        if (fetch->parsed()) {
            FetchOptions opt;
            if (!fetch_base.empty()) opt.base_url = fetch_base;
            const auto path = fetch_and_cache(fetch_name, fetch_dir, opt);
            std::printf("%s\n", path.string().c_str());
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
