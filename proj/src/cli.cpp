#include <chrono>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracpde/harness.hpp"

namespace fracpde {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolver = 2;
constexpr int kExitVerdict = 3;

std::string default_out_root() {
    if (const char* env = std::getenv("FRACPDE_OUT_ROOT")) return env;
    return "runs";
}

struct OutputContext {
    fs::path dir;
    RunManifest manifest;
    std::vector<std::string> files;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    OutputContext(const std::string& outdir, const std::string& kind, ConfigMap config) {
        dir = outdir;
        fs::create_directories(dir);
        manifest.kind = kind;
        manifest.config = std::move(config);
        manifest.input_hash = fnv1a64(canonical_config_string(manifest.config));
    }

    void add(const std::string& name, const std::string& content) {
        write_text_file(dir / name, content);
        files.push_back(name);
    }

    void verdict(const std::string& key, const std::string& value) {
        manifest.verdicts[key] = value;
    }

    void close() {
        manifest.timing_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
        finalize_manifest(dir, manifest, files);
    }
};

std::string pde_trajectory_csv(const RunReport& report) {
    std::string csv = "step,time,l2_norm,w1p_seminorm,lp_norm,potential_energy\n";
    for (std::size_t k = 0; k < report.records.size(); ++k) {
        const StepRecord& r = report.records[k];
        csv += std::to_string(k) + "," + format_double(r.time) + "," + format_double(r.l2) + "," +
               format_double(r.w1p_semi) + "," + format_double(r.lp) + "," +
               format_double(r.potential_energy) + "\n";
    }
    return csv;
}

std::string fode_trajectory_csv(const Trajectory& traj) {
    std::string csv = "step,time,value\n";
    for (std::size_t k = 0; k < traj.values.size(); ++k) {
        if (!std::isfinite(traj.values[k])) break;
        csv += std::to_string(k) + "," + format_double(traj.grid.node(k)) + "," +
               format_double(traj.values[k]) + "\n";
    }
    return csv;
}

json blowup_estimate_json(const BlowupEstimate& est, const FodeProblem& problem) {
    json j;
    j["case"] = to_string(est.case_tag);
    j["delta"] = est.params.delta;
    j["w0"] = est.params.w0;
    if (est.params.a) j["a"] = *est.params.a;
    j["t_m"] = est.t_m;
    if (est.t_m_alt) j["t_m_alt_printed_form"] = *est.t_m_alt;
    j["f_residual_at_t_m"] = blowup_f_residual(est, problem);
    return j;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

ConfigMap snapshot(const CLI::App& app) {
    ConfigMap map;
    for (const CLI::Option* opt : app.get_options()) {
        const auto& lnames = opt->get_lnames();
        if (lnames.empty()) continue;
        const std::string& name = lnames.front();
        if (name == "help" || name == "config" || name == "out") continue;
        if (opt->count() > 0) {
            std::string joined;
            for (const auto& r : opt->results()) {
                if (!joined.empty()) joined += ",";
                joined += r;
            }
            map[name] = joined;
        } else {
            map[name] = opt->get_default_str();
        }
    }
    return map;
}

// ---- subcommand bodies ----------------------------------------------------

struct CommonPdeOptions {
    ExperimentConfig config;
    bool untruncated = false;
    ExperimentKind kind = ExperimentKind::Pde;

    void attach(CLI::App* cmd) {
        cmd->add_option("--n", config.n, "spatial dimension parameter (real, > p)")
            ->capture_default_str();
        cmd->add_option("--p", config.p, "diffusion exponent, > 2")->capture_default_str();
        cmd->add_option("--R", config.R, "ball radius")->capture_default_str();
        cmd->add_option("--mu-ratio", config.mu_ratio, "coupling as a multiple of Lambda(n,p)")
            ->capture_default_str();
        cmd->add_option("--alpha", config.alpha, "fractional order in (0,1)")
            ->capture_default_str();
        cmd->add_option("--m", config.m, "interior radial nodes")->capture_default_str();
        cmd->add_option("--k", config.k, "time intervals")->capture_default_str();
        cmd->add_option("--horizon", config.horizon, "time horizon")->capture_default_str();
        cmd->add_option("--trunc", config.trunc_level, "potential truncation level")
            ->capture_default_str();
        cmd->add_flag("--untruncated", untruncated,
                      "evaluate the potential directly at the staggered nodes");
        cmd->add_option("--grading", config.time_grading, "time mesh grading exponent (>= 1)")
            ->capture_default_str();
        cmd->add_option("--u0-amp", config.u0_amp, "initial bump amplitude")
            ->capture_default_str();
        cmd->add_option("--u0-center", config.u0_center, "initial bump center")
            ->capture_default_str();
        cmd->add_option("--u0-width", config.u0_width, "initial bump width")
            ->capture_default_str();
        cmd->add_flag("--unit-mass", config.u0_unit_mass, "normalize the bump to unit L2 mass");
        cmd->add_option("--thr-l2", config.thresholds.l2_cum, "cumulative L2 blow-up threshold")
            ->capture_default_str();
        cmd->add_option("--thr-w1p", config.thresholds.w1p_cum,
                        "cumulative W^{1,p} blow-up threshold")
            ->capture_default_str();
    }

    ExperimentConfig resolve(const std::string& outdir) {
        if (untruncated) config.trunc_level = std::numeric_limits<double>::infinity();
        config.kind = kind;
        config.outdir = outdir;
        return config;
    }
};

int cmd_fode_blowup_time(double alpha, double q, double u0, const std::string& outdir,
                         const ConfigMap& cfg) {
    const FodeProblem problem{alpha, q, u0};
    const BlowupEstimate est = blowup_time(problem);
    const json j = blowup_estimate_json(est, problem);
    std::cout << j.dump(2) << "\n";
    if (!outdir.empty()) {
        OutputContext out(outdir, "fode-blowup-time", cfg);
        json summary = j;
        summary["schema_version"] = kSchemaVersion;
        out.add("summary.json", summary.dump(2) + "\n");
        out.verdict("case", to_string(est.case_tag));
        out.close();
    }
    return kExitOk;
}

int cmd_fode_solve(double alpha, double q, double u0, double horizon, std::size_t k,
                   double grading, double threshold, const std::string& outdir,
                   const ConfigMap& cfg) {
    const FodeProblem problem{alpha, q, u0};
    const TimeGrid grid = grading == 1.0 ? TimeGrid::uniform(horizon, k)
                                         : TimeGrid::graded(horizon, k, grading);
    const Trajectory traj = volterra_solve(problem, grid, threshold);
    const BlowupEstimate est = blowup_time(problem);
    const LowerBoundReport lb = lower_bound_check(traj, est, problem);

    json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["problem"] = {{"alpha", alpha}, {"q", q}, {"u0", u0}};
    summary["estimate"] = blowup_estimate_json(est, problem);
    summary["numerical"] = {
        {"blowup", traj.blowup_flag},
        {"blowup_time", traj.blowup_index ? grid.node(*traj.blowup_index) : 0.0},
        {"k", k},
        {"horizon", horizon}};
    summary["lower_bound"] = {{"max_violation", lb.max_violation},
                              {"nodes_checked", lb.nodes_checked}};
    std::cout << summary.dump(2) << "\n";

    OutputContext out(outdir, "fode-solve", cfg);
    out.add("trajectory.csv", fode_trajectory_csv(traj));
    out.add("summary.json", summary.dump(2) + "\n");
    out.verdict("blowup", traj.blowup_flag ? "true" : "false");
    out.close();
    return kExitOk;
}

int cmd_fode_compare(std::size_t trials, std::uint64_t seed, double alpha, double horizon,
                     std::size_t k, const std::string& outdir, const ConfigMap& cfg) {
    const auto outcomes = run_scalar_comparison_campaign(trials, seed, alpha, horizon, k);
    std::size_t violations = 0, bad_preconditions = 0;
    double worst = 0.0;
    std::string csv = "trial,preconditions_ok,ordering_ok,max_crossing\n";
    for (const auto& o : outcomes) {
        if (!o.preconditions_ok) ++bad_preconditions;
        else if (!o.ordering_ok) ++violations;
        worst = std::max(worst, o.max_crossing);
        csv += std::to_string(o.trial) + "," + (o.preconditions_ok ? "1" : "0") + "," +
               (o.ordering_ok ? "1" : "0") + "," + format_double(o.max_crossing) + "\n";
    }
    json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["trials"] = trials;
    summary["seed"] = seed;
    summary["ordering_violations"] = violations;
    summary["precondition_failures"] = bad_preconditions;
    summary["max_crossing"] = worst;
    const bool pass = violations == 0 && bad_preconditions == 0;
    summary["pass"] = pass;
    std::cout << summary.dump(2) << "\n";

    OutputContext out(outdir, "fode-compare", cfg);
    out.add("trials.csv", csv);
    out.add("summary.json", summary.dump(2) + "\n");
    out.verdict("pass", pass ? "true" : "false");
    out.close();
    return pass ? kExitOk : kExitVerdict;
}

json pde_summary_json(const PdeRun& run) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["blowup"] = run.report.blowup;
    j["blowup_time"] = run.report.blowup_time;
    j["blowup_reason"] = run.report.blowup_reason;
    j["solver_diverged"] = run.report.solver_diverged;
    j["steps_recorded"] = run.report.records.size();
    j["final_l2"] = run.report.records.back().l2;
    j["cum_grad_p"] = run.report.records.back().cum_grad_p;
    j["cum_lp_p"] = run.report.records.back().cum_lp_p;
    j["mu"] = run.problem.spec.mu;
    j["lambda"] = hardy_constant(run.problem.spec.domain.n, run.problem.spec.p);
    return j;
}

int cmd_pde_solve(CommonPdeOptions& opts, const std::string& outdir, const ConfigMap& cfg) {
    const ExperimentConfig config = opts.resolve(outdir);
    const PdeRun run = solve(make_pde_problem(config));
    json summary = pde_summary_json(run);
    std::cout << summary.dump(2) << "\n";

    OutputContext out(outdir, "pde-solve", cfg);
    out.add("trajectory.csv", pde_trajectory_csv(run.report));
    out.add("summary.json", summary.dump(2) + "\n");
    out.verdict("blowup", run.report.blowup ? "true" : "false");
    out.close();
    return kExitOk;
}

int cmd_eigen(double n, double p, double R, std::size_t m, const std::string& levels_text,
              const std::string& outdir, const ConfigMap& cfg) {
    const std::vector<double> levels = parse_list(levels_text);
    if (levels.empty()) throw std::invalid_argument("empty truncation level list");
    const PotentialSpec spec{p, 0.0, RadialDomain{n, R}};
    const RadialGrid grid(m, R, n);
    const double lambda = hardy_constant(n, p);

    std::string csv = "trunc_level,lambda_n,residual,iterations\n";
    json rows = json::array();
    double prev = std::numeric_limits<double>::infinity();
    bool nonincreasing = true, above = true;
    for (double level : levels) {
        const EigenResult res = eigen_first(spec, level, grid);
        csv += format_double(level) + "," + format_double(res.lambda) + "," +
               format_double(res.residual) + "," + std::to_string(res.iterations) + "\n";
        rows.push_back({{"trunc_level", level},
                        {"lambda_n", res.lambda},
                        {"residual", res.residual},
                        {"iterations", res.iterations}});
        if (res.lambda > prev * (1.0 + 1e-8)) nonincreasing = false;
        if (res.lambda < 0.99 * lambda) above = false;
        prev = res.lambda;
    }
    json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["lambda_hardy"] = lambda;
    summary["rows"] = rows;
    summary["nonincreasing"] = nonincreasing;
    summary["above_099_lambda"] = above;
    std::cout << summary.dump(2) << "\n";

    OutputContext out(outdir, "eigen", cfg);
    out.add("eigen.csv", csv);
    out.add("summary.json", summary.dump(2) + "\n");
    out.verdict("nonincreasing", nonincreasing ? "true" : "false");
    out.verdict("above_099_lambda", above ? "true" : "false");
    out.close();
    return kExitOk;
}

int cmd_sweep(CommonPdeOptions& opts, const std::string& ratios_text, std::size_t workers,
              const std::string& outdir, const ConfigMap& cfg) {
    ExperimentConfig config = opts.resolve(outdir);
    config.mu_ratios = parse_list(ratios_text);
    config.workers = workers;
    const SweepReport report = run_threshold_sweep(config);

    std::string csv =
        "mu_ratio,mu,completed,blowup,detection_time,reason,certified,subsolution_tmax,"
        "ordering_violation,error\n";
    json rows = json::array();
    for (const auto& c : report.cells) {
        csv += format_double(c.mu_ratio) + "," + format_double(c.mu) + "," +
               (c.completed ? "1" : "0") + "," + (c.blowup ? "1" : "0") + "," +
               format_double(c.detection_time) + "," + c.reason + "," +
               (c.certified ? "1" : "0") + "," + format_double(c.subsolution_tmax) + "," +
               format_double(c.ordering_violation) + "," + c.error + "\n";
        rows.push_back({{"mu_ratio", c.mu_ratio},
                        {"mu", c.mu},
                        {"completed", c.completed},
                        {"blowup", c.blowup},
                        {"detection_time", c.detection_time},
                        {"reason", c.reason},
                        {"certified", c.certified},
                        {"subsolution_tmax", c.subsolution_tmax},
                        {"ordering_violation", c.ordering_violation},
                        {"error", c.error}});
    }
    json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["cells"] = rows;
    std::cout << summary.dump(2) << "\n";

    OutputContext out(outdir, "sweep", cfg);
    out.add("sweep.csv", csv);
    out.add("summary.json", summary.dump(2) + "\n");
    out.close();
    return kExitOk;
}

int cmd_truncation(CommonPdeOptions& opts, const std::string& schedule_text,
                   const std::string& outdir, const ConfigMap& cfg) {
    ExperimentConfig config = opts.resolve(outdir);
    config.trunc_schedule = parse_list(schedule_text);
    const TruncationReport report = run_truncation_study(config);

    std::string csv = "level_lo,level_hi,dist_l2,dist_lp,monotone_violation\n";
    json rows = json::array();
    for (const auto& pr : report.pairs) {
        csv += format_double(pr.level_lo) + "," + format_double(pr.level_hi) + "," +
               format_double(pr.dist_l2) + "," + format_double(pr.dist_lp) + "," +
               format_double(pr.monotone_violation) + "\n";
        rows.push_back({{"level_lo", pr.level_lo},
                        {"level_hi", pr.level_hi},
                        {"dist_l2", pr.dist_l2},
                        {"dist_lp", pr.dist_lp},
                        {"monotone_violation", pr.monotone_violation}});
    }
    json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["levels"] = report.levels;
    summary["pairs"] = rows;
    std::cout << summary.dump(2) << "\n";

    OutputContext out(outdir, "truncation", cfg);
    out.add("truncation.csv", csv);
    out.add("summary.json", summary.dump(2) + "\n");
    out.close();
    return kExitOk;
}

int cmd_verify_apriori(CommonPdeOptions& opts, double slack, const std::string& outdir,
                       const ConfigMap& cfg) {
    const ExperimentConfig config = opts.resolve(outdir);
    const PdeRun run = solve(make_pde_problem(config));
    const AprioriVerdict verdict = verify_apriori(run, slack);

    json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["constants"] = {{"epsilon", verdict.constants.epsilon},
                            {"omega0", verdict.constants.omega0},
                            {"gamma", verdict.constants.gamma},
                            {"c3", verdict.constants.c3},
                            {"a1", verdict.constants.a1},
                            {"a2", verdict.constants.a2}};
    summary["achieved_grad"] = verdict.achieved_grad;
    summary["achieved_lp"] = verdict.achieved_lp;
    summary["ratio_grad"] = verdict.ratio_grad;
    summary["ratio_lp"] = verdict.ratio_lp;
    summary["slack"] = slack;
    summary["pass"] = verdict.pass;
    summary["run"] = pde_summary_json(run);
    std::cout << summary.dump(2) << "\n";

    OutputContext out(outdir, "verify-apriori", cfg);
    out.add("trajectory.csv", pde_trajectory_csv(run.report));
    out.add("summary.json", summary.dump(2) + "\n");
    out.verdict("pass", verdict.pass ? "true" : "false");
    out.close();
    return verdict.pass ? kExitOk : kExitVerdict;
}

int cmd_verify_hardy(double n, double p, double R, std::size_t m, std::size_t trials,
                     std::uint64_t seed, const std::string& outdir, const ConfigMap& cfg) {
    const PotentialSpec spec{p, 0.0, RadialDomain{n, R}};
    const HardyVerdict verdict = verify_hardy(spec, m, trials, seed);

    json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["lambda"] = verdict.lambda;
    summary["min_ratio"] = verdict.min_ratio;
    summary["min_ratio_trial"] = verdict.min_ratio_trial;
    summary["near_extremal_ratio"] = verdict.near_extremal_ratio;
    summary["trials"] = verdict.trials;
    summary["pass"] = verdict.pass;
    std::cout << summary.dump(2) << "\n";

    OutputContext out(outdir, "verify-hardy", cfg);
    out.add("summary.json", summary.dump(2) + "\n");
    out.verdict("pass", verdict.pass ? "true" : "false");
    out.close();
    return verdict.pass ? kExitOk : kExitVerdict;
}

int cmd_identity_check(double alpha, const std::string& klist_text, double min_order,
                       const std::string& outdir, const ConfigMap& cfg) {
    const std::vector<double> ks = parse_list(klist_text);
    if (ks.size() < 2) throw std::invalid_argument("need at least two grid sizes");
    std::string csv = "k,residual\n";
    std::vector<double> residuals;
    for (double kd : ks) {
        const std::size_t k = static_cast<std::size_t>(kd);
        const TimeGrid grid = TimeGrid::uniform(1.0, k);
        std::vector<double> u(k + 1);
        for (std::size_t i = 0; i <= k; ++i) u[i] = std::sin(grid.node(i));
        const double res = fundamental_identity_residual(u, grid, FracParams{alpha});
        residuals.push_back(res);
        csv += std::to_string(k) + "," + format_double(res) + "\n";
    }
    double worst_order = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < residuals.size(); ++i) {
        const double order = std::log2(residuals[i] / residuals[i + 1]) /
                             std::log2(ks[i + 1] / ks[i]);
        worst_order = std::min(worst_order, order);
    }
    const bool pass = worst_order >= min_order;

    json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["alpha"] = alpha;
    summary["residuals"] = residuals;
    summary["min_observed_order"] = worst_order;
    summary["min_required_order"] = min_order;
    summary["pass"] = pass;
    std::cout << summary.dump(2) << "\n";

    OutputContext out(outdir, "identity-check", cfg);
    out.add("identity.csv", csv);
    out.add("summary.json", summary.dump(2) + "\n");
    out.verdict("pass", pass ? "true" : "false");
    out.close();
    return pass ? kExitOk : kExitVerdict;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"Desk-scale lab for time-fractional quasilinear diffusion with a "
                 "double-singular potential: scalar blow-up solvers, radial evolution, "
                 "weighted eigenvalues, and verification harnesses"};
    app.require_subcommand(1);
    app.fallthrough(false);

    std::string outdir;

    // fode-blowup-time
    auto* c_bt = app.add_subcommand("fode-blowup-time", "closed-form blow-up time of the "
                                                        "scalar problem D^a u = u^q");
    double bt_alpha = 0.5, bt_q = 2.0, bt_u0 = 1.0;
    c_bt->add_option("--alpha", bt_alpha, "fractional order")->capture_default_str();
    c_bt->add_option("--q", bt_q, "nonlinearity exponent > 1")->capture_default_str();
    c_bt->add_option("--u0", bt_u0, "initial value > 0")->capture_default_str();
    c_bt->add_option("--out", outdir, "output directory (optional)");

    // fode-solve
    auto* c_fs = app.add_subcommand("fode-solve", "implicit product-integration solve of the "
                                                  "scalar blow-up problem");
    double fs_alpha = 0.5, fs_q = 2.0, fs_u0 = 1.0, fs_h = 1.0, fs_grading = 1.0, fs_thr = 1e9;
    std::size_t fs_k = 1024;
    c_fs->add_option("--alpha", fs_alpha, "fractional order")->capture_default_str();
    c_fs->add_option("--q", fs_q, "nonlinearity exponent > 1")->capture_default_str();
    c_fs->add_option("--u0", fs_u0, "initial value > 0")->capture_default_str();
    c_fs->add_option("--horizon", fs_h, "time horizon")->capture_default_str();
    c_fs->add_option("--k", fs_k, "time intervals")->capture_default_str();
    c_fs->add_option("--grading", fs_grading, "time mesh grading (>= 1)")->capture_default_str();
    c_fs->add_option("--threshold", fs_thr, "divergence threshold")->capture_default_str();
    c_fs->add_option("--out", outdir, "output directory");

    // fode-compare
    auto* c_fc = app.add_subcommand("fode-compare", "seeded scalar comparison-principle "
                                                    "campaign");
    std::size_t fc_trials = 50, fc_k = 512;
    std::uint64_t fc_seed = 20240801;
    double fc_alpha = 0.5, fc_h = 1.0;
    c_fc->add_option("--trials", fc_trials, "number of random pairs")->capture_default_str();
    c_fc->add_option("--seed", fc_seed, "random seed")->capture_default_str();
    c_fc->add_option("--alpha", fc_alpha, "fractional order")->capture_default_str();
    c_fc->add_option("--horizon", fc_h, "time horizon")->capture_default_str();
    c_fc->add_option("--k", fc_k, "time intervals")->capture_default_str();
    c_fc->add_option("--out", outdir, "output directory");

    // pde-solve
    auto* c_ps = app.add_subcommand("pde-solve", "radial evolution run with blow-up detection");
    CommonPdeOptions ps_opts;
    ps_opts.attach(c_ps);
    c_ps->add_option("--out", outdir, "output directory");

    // eigen
    auto* c_ei = app.add_subcommand("eigen", "first weighted eigenvalue across truncation "
                                             "levels");
    double ei_n = 4.0, ei_p = 3.0, ei_R = 1.0;
    std::size_t ei_m = 1000;
    std::string ei_levels = "10,100,1000";
    c_ei->add_option("--n", ei_n, "spatial dimension parameter")->capture_default_str();
    c_ei->add_option("--p", ei_p, "diffusion exponent")->capture_default_str();
    c_ei->add_option("--R", ei_R, "ball radius")->capture_default_str();
    c_ei->add_option("--m", ei_m, "interior radial nodes")->capture_default_str();
    c_ei->add_option("--trunc-list", ei_levels, "comma-separated truncation levels")
        ->capture_default_str();
    c_ei->add_option("--out", outdir, "output directory");

    // sweep
    auto* c_sw = app.add_subcommand("sweep", "bounded vs blow-up phase table across mu/Lambda");
    CommonPdeOptions sw_opts;
    sw_opts.kind = ExperimentKind::Sweep;
    sw_opts.attach(c_sw);
    std::string sw_ratios = "0.25,0.5,0.75,2,4";
    std::size_t sw_workers = 4;
    c_sw->add_option("--mu-ratios", sw_ratios, "comma-separated mu/Lambda values")
        ->capture_default_str();
    c_sw->add_option("--workers", sw_workers, "concurrent cells")->capture_default_str();
    c_sw->add_option("--out", outdir, "output directory");

    // truncation
    auto* c_tr = app.add_subcommand("truncation", "Cauchy study of the truncated runs in N");
    CommonPdeOptions tr_opts;
    tr_opts.kind = ExperimentKind::Truncation;
    tr_opts.attach(c_tr);
    std::string tr_schedule = "10,100,1000,10000";
    c_tr->add_option("--trunc-schedule", tr_schedule, "comma-separated truncation levels")
        ->capture_default_str();
    c_tr->add_option("--out", outdir, "output directory");

    // verify-apriori
    auto* c_va = app.add_subcommand("verify-apriori", "check the cumulative energy bounds of a "
                                                      "subcritical run");
    CommonPdeOptions va_opts;
    va_opts.kind = ExperimentKind::Verify;
    va_opts.attach(c_va);
    double va_slack = 1.0;
    c_va->add_option("--slack", va_slack, "multiplicative slack on both bounds")
        ->capture_default_str();
    c_va->add_option("--out", outdir, "output directory");

    // verify-hardy
    auto* c_vh = app.add_subcommand("verify-hardy", "random-profile check of the weighted "
                                                    "Hardy inequality");
    double vh_n = 4.0, vh_p = 3.0, vh_R = 1.0;
    std::size_t vh_m = 2000, vh_trials = 200;
    std::uint64_t vh_seed = 20240801;
    c_vh->add_option("--n", vh_n, "spatial dimension parameter")->capture_default_str();
    c_vh->add_option("--p", vh_p, "diffusion exponent")->capture_default_str();
    c_vh->add_option("--R", vh_R, "ball radius")->capture_default_str();
    c_vh->add_option("--m", vh_m, "quadrature nodes")->capture_default_str();
    c_vh->add_option("--trials", vh_trials, "random profiles")->capture_default_str();
    c_vh->add_option("--seed", vh_seed, "random seed")->capture_default_str();
    c_vh->add_option("--out", outdir, "output directory");

    // identity-check
    auto* c_ic = app.add_subcommand("identity-check", "refinement study of the quadratic-kernel "
                                                      "identity residual");
    double ic_alpha = 0.5, ic_min_order = 0.8;
    std::string ic_klist = "128,256,512";
    c_ic->add_option("--alpha", ic_alpha, "fractional order")->capture_default_str();
    c_ic->add_option("--k-list", ic_klist, "comma-separated grid sizes")->capture_default_str();
    c_ic->add_option("--min-order", ic_min_order, "required empirical order")
        ->capture_default_str();
    c_ic->add_option("--out", outdir, "output directory");

    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->set_config("--config", "", "flat key=value configuration file (flags win)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (outdir.empty()) outdir = default_out_root() + "/" + sub->get_name();
        const ConfigMap cfg = snapshot(*sub);
        if (sub == c_bt) {
            const bool wants_files = sub->get_option("--out")->count() > 0;
            return cmd_fode_blowup_time(bt_alpha, bt_q, bt_u0, wants_files ? outdir : "", cfg);
        }
        if (sub == c_fs)
            return cmd_fode_solve(fs_alpha, fs_q, fs_u0, fs_h, fs_k, fs_grading, fs_thr, outdir,
                                  cfg);
        if (sub == c_fc)
            return cmd_fode_compare(fc_trials, fc_seed, fc_alpha, fc_h, fc_k, outdir, cfg);
        if (sub == c_ps) return cmd_pde_solve(ps_opts, outdir, cfg);
        if (sub == c_ei) return cmd_eigen(ei_n, ei_p, ei_R, ei_m, ei_levels, outdir, cfg);
        if (sub == c_sw) return cmd_sweep(sw_opts, sw_ratios, sw_workers, outdir, cfg);
        if (sub == c_tr) return cmd_truncation(tr_opts, tr_schedule, outdir, cfg);
        if (sub == c_va) return cmd_verify_apriori(va_opts, va_slack, outdir, cfg);
        if (sub == c_vh)
            return cmd_verify_hardy(vh_n, vh_p, vh_R, vh_m, vh_trials, vh_seed, outdir, cfg);
        if (sub == c_ic) return cmd_identity_check(ic_alpha, ic_klist, ic_min_order, outdir, cfg);
        std::cerr << "unknown subcommand\n";
        return kExitUsage;
    } catch (const regime_error& e) {
        std::cerr << "regime error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid parameters: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    }
}

}  // namespace fracpde
