#include "fracpde/harness.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace fracpde {

void ExperimentConfig::validate() const {
    FracParams{alpha}.validate();
    if (!(p > 2.0)) throw std::invalid_argument("exponent must satisfy p > 2");
    if (!(n > p)) throw std::invalid_argument("dimension must satisfy n > p");
    if (!(R > 0.0)) throw std::invalid_argument("radius must be positive");
    if (!(mu_ratio >= 0.0)) throw std::invalid_argument("mu must be nonnegative");
    if (!(trunc_level >= 1.0) && !std::isinf(trunc_level))
        throw std::invalid_argument("truncation level must be >= 1");
    if (m < 2) throw std::invalid_argument("need at least 2 radial nodes");
    if (k < 1) throw std::invalid_argument("need at least 1 time interval");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(time_grading >= 1.0)) throw std::invalid_argument("time grading must be >= 1");
    if (workers < 1) throw std::invalid_argument("need at least 1 worker");
}

std::vector<double> bump_profile(const RadialGrid& grid, double amp, double center,
                                 double width) {
    if (!(width > 0.0)) throw std::invalid_argument("bump width must be positive");
    std::vector<double> u(grid.m());
    for (std::size_t j = 0; j < grid.m(); ++j) {
        const double r = grid.node(j);
        const double z = (r - center) / width;
        u[j] = amp * std::exp(-z * z) * (1.0 - (r / grid.R()) * (r / grid.R()));
    }
    return u;
}

double profile_l2_squared(const RadialGrid& grid, std::span<const double> u) {
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.m(); ++j) acc += u[j] * u[j] * grid.weight(j);
    return sphere_surface_area(grid.n()) * acc;
}

PdeProblem make_pde_problem(const ExperimentConfig& config) {
    config.validate();
    PdeProblem prob;
    prob.spec = config.potential_spec();
    prob.alpha = config.alpha;
    prob.trunc_level = config.trunc_level;
    prob.rgrid = RadialGrid(config.m, config.R, config.n);
    prob.tgrid = config.time_grading == 1.0
                     ? TimeGrid::uniform(config.horizon, config.k)
                     : TimeGrid::graded(config.horizon, config.k, config.time_grading);
    prob.u0 = bump_profile(prob.rgrid, config.u0_amp, config.u0_center, config.u0_width);
    if (config.u0_unit_mass) {
        // Normalize the bump shape to unit L^2 mass; u0_amp then scales the
        // normalized profile (amp 1 = unit mass, amp 50 = 50x the unit bump).
        const double mass = profile_l2_squared(prob.rgrid, prob.u0);
        if (!(mass > 0.0)) throw std::invalid_argument("cannot normalize a zero profile");
        for (auto& v : prob.u0) v *= config.u0_amp / std::sqrt(mass);
    }
    prob.thresholds = config.thresholds;
    return prob;
}

SweepReport run_threshold_sweep(const ExperimentConfig& config) {
    config.validate();
    SweepReport report;
    report.cells.resize(config.mu_ratios.size());
    if (config.mu_ratios.empty()) return report;

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= config.mu_ratios.size()) return;
            SweepCell& cell = report.cells[i];
            cell.mu_ratio = config.mu_ratios[i];
            try {
                ExperimentConfig local = config;
                local.mu_ratio = cell.mu_ratio;
                cell.mu = local.mu();
                const PdeProblem problem = make_pde_problem(local);
                const PdeRun run = solve(problem);
                cell.completed = true;
                cell.blowup = run.report.blowup;
                cell.detection_time = run.report.blowup_time;
                cell.reason = run.report.blowup_reason;
                const double lambda = hardy_constant(local.n, local.p);
                if (cell.blowup && cell.mu > lambda) {
                    try {
                        const PositiveProfile prof =
                            positive_profile_x(problem.spec, problem.trunc_level, problem.rgrid);
                        const double eps = auto_eps_scale(problem.u0, prof.x);
                        const SeparableSubsolution sub =
                            separable_subsolution(problem, prof.x, eps);
                        const SubsolutionOrderingReport ord =
                            subsolution_ordering_check(run, sub, 1e-6);
                        cell.ordering_violation = ord.max_violation;
                        cell.subsolution_tmax = sub.time_blowup.t_m;
                        cell.certified = !ord.first_violation.has_value();
                    } catch (const std::exception& e) {
                        // e.g. truncation level too low (mu <= lambda_N): the
                        // cell still stands, only the certificate is missing
                        cell.certified = false;
                        cell.error = std::string("certification: ") + e.what();
                    }
                }
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t count = std::min(config.workers, config.mu_ratios.size());
    pool.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return report;
}

TruncationReport run_truncation_study(const ExperimentConfig& config) {
    config.validate();
    if (!(config.mu_ratio < 1.0))
        throw regime_error("truncation study runs in the subcritical regime mu < Lambda");
    TruncationReport report;
    report.levels = config.trunc_schedule;
    if (report.levels.size() < 1) return report;

    std::vector<PdeRun> runs;
    runs.reserve(report.levels.size());
    for (double level : report.levels) {
        ExperimentConfig local = config;
        local.trunc_level = level;
        runs.push_back(solve(make_pde_problem(local)));
    }

    const double area = sphere_surface_area(config.n);
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        const PdeRun& lo = runs[i];
        const PdeRun& hi = runs[i + 1];
        TruncationPair pair;
        pair.level_lo = report.levels[i];
        pair.level_hi = report.levels[i + 1];
        const std::size_t rows = std::min(lo.trajectory.size(), hi.trajectory.size());
        double l2 = 0.0, lp = 0.0;
        for (std::size_t k = 1; k < rows; ++k) {
            const double dt = lo.problem.tgrid.dt(k);
            for (std::size_t j = 0; j < lo.problem.rgrid.m(); ++j) {
                const double diff = lo.trajectory[k][j] - hi.trajectory[k][j];
                const double w = lo.problem.rgrid.weight(j) * dt;
                l2 += diff * diff * w;
                lp += std::pow(std::abs(diff), config.p) * w;
                pair.monotone_violation = std::max(pair.monotone_violation, diff);
            }
        }
        pair.dist_l2 = std::sqrt(area * l2);
        pair.dist_lp = std::pow(area * lp, 1.0 / config.p);
        report.pairs.push_back(pair);
    }
    return report;
}

AprioriVerdict verify_apriori(const RunReport& report, const AprioriConstants& constants,
                              double slack) {
    if (report.records.empty()) throw std::invalid_argument("report has no recorded steps");
    AprioriVerdict v;
    v.constants = constants;
    v.achieved_grad = report.records.back().cum_grad_p;
    v.achieved_lp = report.records.back().cum_lp_p;
    auto ratio = [](double achieved, double bound) {
        if (bound > 0.0) return achieved / bound;
        return achieved == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    };
    v.ratio_grad = ratio(v.achieved_grad, constants.a1);
    v.ratio_lp = ratio(v.achieved_lp, constants.a2);
    v.pass = v.ratio_grad <= slack && v.ratio_lp <= slack;
    return v;
}

AprioriVerdict verify_apriori(const PdeRun& run, double slack) {
    const double u0sq = profile_l2_squared(run.problem.rgrid, run.problem.u0);
    const AprioriConstants constants = apriori_constants(
        run.problem.spec, run.problem.alpha, run.problem.tgrid.horizon(), u0sq);
    return verify_apriori(run.report, constants, slack);
}

double hardy_rayleigh_ratio(const PotentialSpec& spec, const RadialGrid& grid,
                            std::span<const double> values,
                            std::span<const double> derivatives) {
    spec.validate();
    if (values.size() != grid.m() || derivatives.size() != grid.m())
        throw std::invalid_argument("profile sample count does not match the grid");
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < grid.m(); ++j) {
        const double w = grid.weight(j);
        num += std::pow(std::abs(derivatives[j]), spec.p) * w;
        den += potential_w(grid.node(j), spec) * std::pow(std::abs(values[j]), spec.p) * w;
    }
    if (!(den > 0.0)) throw std::invalid_argument("profile is identically zero");
    return num / den;
}

void near_extremal_profile(const PotentialSpec& spec, const RadialGrid& grid, double cap_radius,
                           std::vector<double>& values, std::vector<double>& derivatives) {
    spec.validate();
    const double kap = spec.kappa();
    const double beta = (spec.p - 1.0) / spec.p;
    const double R = grid.R();
    auto E = [&](double r) { return std::pow(r, -kap) - std::pow(R, -kap); };
    const double cap = E(cap_radius);
    values.resize(grid.m());
    derivatives.resize(grid.m());
    for (std::size_t j = 0; j < grid.m(); ++j) {
        const double r = grid.node(j);
        if (r < cap_radius) {
            values[j] = std::pow(cap, beta);
            derivatives[j] = 0.0;
        } else {
            const double e = E(r);
            values[j] = std::pow(e, beta);
            derivatives[j] = beta * std::pow(e, beta - 1.0) * (-kap * std::pow(r, -kap - 1.0));
        }
    }
}

HardyVerdict verify_hardy(const PotentialSpec& spec, std::size_t m, std::size_t trials,
                          std::uint64_t seed, double slack_low, double slack_high) {
    spec.validate();
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    const RadialGrid grid(m, spec.domain.R, spec.domain.n);
    HardyVerdict verdict;
    verdict.lambda = hardy_constant(spec.domain.n, spec.p);
    verdict.trials = trials;
    verdict.min_ratio = std::numeric_limits<double>::infinity();

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> bump_count(3, 6);
    std::uniform_real_distribution<double> amp(0.2, 2.0);
    std::uniform_real_distribution<double> center(0.05, 0.95);
    std::uniform_real_distribution<double> width(0.05, 0.4);

    const double R = spec.domain.R;
    std::vector<double> vals(grid.m()), ders(grid.m());
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const int nb = bump_count(rng);
        std::vector<double> a(nb), c(nb), s(nb);
        for (int i = 0; i < nb; ++i) {
            a[i] = amp(rng);
            c[i] = center(rng) * R;
            s[i] = width(rng) * R;
        }
        for (std::size_t j = 0; j < grid.m(); ++j) {
            const double r = grid.node(j);
            double v = 0.0, dv = 0.0;
            for (int i = 0; i < nb; ++i) {
                const double z = (r - c[i]) / s[i];
                const double b = a[i] * std::exp(-z * z);
                v += b;
                dv += b * (-2.0 * z / s[i]);
            }
            const double env = 1.0 - (r / R) * (r / R);
            ders[j] = dv * env + v * (-2.0 * r / (R * R));
            vals[j] = v * env;
        }
        const double ratio = hardy_rayleigh_ratio(spec, grid, vals, ders);
        if (ratio < verdict.min_ratio) {
            verdict.min_ratio = ratio;
            verdict.min_ratio_trial = trial;
        }
    }

    near_extremal_profile(spec, grid, 0.02 * R, vals, ders);
    verdict.near_extremal_ratio = hardy_rayleigh_ratio(spec, grid, vals, ders);
    verdict.pass = verdict.min_ratio >= verdict.lambda * (1.0 - slack_low) &&
                   verdict.near_extremal_ratio <= verdict.lambda * (1.0 + slack_high);
    return verdict;
}

std::vector<ScalarComparisonOutcome> run_scalar_comparison_campaign(std::size_t trials,
                                                                    std::uint64_t seed,
                                                                    double alpha, double horizon,
                                                                    std::size_t k) {
    FracParams params{alpha};
    params.validate();
    const TimeGrid grid = TimeGrid::uniform(horizon, k);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> drive(-2.0, 2.0);
    std::uniform_real_distribution<double> freq(0.5, 6.0);
    std::uniform_real_distribution<double> wobble(-1.5, 1.5);
    std::uniform_real_distribution<double> wobble_rate(0.2, 2.0);
    std::uniform_real_distribution<double> decay(0.2, 3.0);
    std::uniform_real_distribution<double> start(-2.0, 2.0);
    std::uniform_real_distribution<double> gap(1e-3, 2.0);

    std::vector<ScalarComparisonOutcome> out;
    out.reserve(trials);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const double a = drive(rng), w = freq(rng), b = wobble(rng), c = wobble_rate(rng),
                     d = decay(rng);
        ScalarRhs rhs{[=](double t, double u) { return a * std::sin(w * t) + b * std::cos(c * u) - d * u; },
                      std::abs(b) * c + d};
        const double y0 = start(rng);
        const Trajectory sub = solve_scalar_l1(rhs, y0, grid, params);
        const Trajectory sup = solve_scalar_l1(rhs, y0 + gap(rng), grid, params);
        const ComparisonReport rep = comparison_check(rhs, params, sub, sup, 1e-8, 1e-7);
        out.push_back({trial, rep.preconditions_ok, rep.ordering_ok, rep.max_crossing});
    }
    return out;
}

std::vector<PdeComparisonOutcome> run_pde_comparison_campaign(const ExperimentConfig& base,
                                                              std::size_t pairs,
                                                              std::uint64_t seed) {
    base.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mu_ratio(0.3, 1.2);
    std::uniform_real_distribution<double> level(20.0, 100.0);
    std::uniform_real_distribution<double> amp(0.3, 1.5);
    std::uniform_real_distribution<double> center(0.25, 0.6);
    std::uniform_real_distribution<double> width(0.1, 0.3);
    std::uniform_real_distribution<double> lift(0.05, 0.5);

    std::vector<PdeComparisonOutcome> out;
    out.reserve(pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
        ExperimentConfig local = base;
        local.mu_ratio = mu_ratio(rng);
        local.trunc_level = level(rng);
        local.u0_amp = amp(rng);
        local.u0_center = center(rng) * local.R;
        local.u0_width = width(rng) * local.R;
        PdeProblem lower_problem = make_pde_problem(local);

        PdeProblem upper_problem = lower_problem;
        const std::vector<double> bump2 =
            bump_profile(lower_problem.rgrid, lift(rng), center(rng) * local.R,
                         width(rng) * local.R);
        for (std::size_t j = 0; j < upper_problem.u0.size(); ++j)
            upper_problem.u0[j] += bump2[j];

        const PdeRun lower = solve(lower_problem);
        const PdeRun upper = solve(upper_problem);
        const PdeComparisonReport rep = pde_comparison_check(lower, upper, 1e-8, 1e-6);
        out.push_back({i, rep.preconditions_ok, rep.ordering_ok, rep.max_crossing,
                       rep.residual_gap_max});
    }
    return out;
}

}  // namespace fracpde
