#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracpde/io.hpp"
#include "fracpde/pde_radial.hpp"
#include "fracpde/potential.hpp"

namespace fracpde {

enum class ExperimentKind { Fode, Pde, Sweep, Truncation, Eigen, Verify };

/**
 * Flat parameter record shared by all experiments; each experiment reads the
 * fields it needs. Validation covers the common parameter domains before any
 * dispatch.
 */
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Pde;

    // scalar problem
    double alpha = 0.5;
    double q = 2.0;
    double fode_u0 = 1.0;
    double divergence_threshold = 1e9;

    // domain / potential
    double n = 4.0;
    double p = 3.0;
    double R = 1.0;
    double mu_ratio = 0.5;  // mu as a multiple of Lambda(n, p)
    double trunc_level = 1e4;

    // grids
    std::size_t m = 200;
    std::size_t k = 2000;
    double horizon = 1.0;
    double time_grading = 1.0;

    // initial bump amp * exp(-((r-center)/width)^2) * (1 - (r/R)^2)
    double u0_amp = 1.0;
    double u0_center = 0.4;
    double u0_width = 0.15;
    bool u0_unit_mass = false;

    BlowupThresholds thresholds;

    // sweep / truncation / hardy
    std::vector<double> mu_ratios;
    std::vector<double> trunc_schedule;
    std::size_t workers = 4;
    std::size_t trials = 200;
    std::uint64_t seed = 12345;
    double slack = 1.0;

    std::string outdir;

    void validate() const;
    double mu() const { return mu_ratio * hardy_constant(n, p); }
    PotentialSpec potential_spec() const { return PotentialSpec{p, mu(), RadialDomain{n, R}}; }
};

/// Smooth positive bump amp * exp(-((r-center)/width)^2) * (1 - (r/R)^2) at
/// the interior nodes; vanishes at the boundary, positive inside.
std::vector<double> bump_profile(const RadialGrid& grid, double amp, double center, double width);

/// ||u||_{L^2(Omega)}^2 by staggered midpoint quadrature (includes the
/// angular measure).
double profile_l2_squared(const RadialGrid& grid, std::span<const double> u);

/// Assembles the full discrete problem from a config (normalizing the bump to
/// unit L^2 mass when requested).
PdeProblem make_pde_problem(const ExperimentConfig& config);

struct SweepCell {
    double mu_ratio = 0.0;
    double mu = 0.0;
    bool completed = false;
    bool blowup = false;
    double detection_time = 0.0;
    std::string reason;
    bool certified = false;       // separable-subsolution chain succeeded
    double subsolution_tmax = 0.0;  // certified upper bound for the blow-up time
    double ordering_violation = 0.0;
    std::string error;
};

struct SweepReport {
    std::vector<SweepCell> cells;
};

/// Runs one solve per mu in config.mu_ratios (concurrently, up to
/// config.workers jobs) and classifies bounded vs blow-up; cells above the
/// Hardy threshold also run the subsolution certification chain. Per-cell
/// failures are recorded and the sweep continues.
SweepReport run_threshold_sweep(const ExperimentConfig& config);

struct TruncationPair {
    double level_lo = 0.0;
    double level_hi = 0.0;
    double dist_l2 = 0.0;   // L^2 over space-time of u_N - u_N'
    double dist_lp = 0.0;   // L^p over space-time
    double monotone_violation = 0.0;  // max of (u_N - u_N') over nodes
};

struct TruncationReport {
    std::vector<double> levels;
    std::vector<TruncationPair> pairs;  // consecutive levels
};

TruncationReport run_truncation_study(const ExperimentConfig& config);

struct AprioriVerdict {
    AprioriConstants constants;
    double achieved_grad = 0.0;  // int int |grad u|^p
    double achieved_lp = 0.0;    // int int |u|^p
    double ratio_grad = 0.0;
    double ratio_lp = 0.0;
    bool pass = false;
};

/// Checks the cumulative space-time integrals of a finished run against the
/// constants, with a multiplicative slack on both bounds.
AprioriVerdict verify_apriori(const RunReport& report, const AprioriConstants& constants,
                              double slack = 1.0);
/// Convenience form: derives the constants from the run itself and enforces
/// the subcritical regime.
AprioriVerdict verify_apriori(const PdeRun& run, double slack = 1.0);

struct HardyVerdict {
    double lambda = 0.0;
    double min_ratio = 0.0;           // over the random admissible profiles
    std::size_t min_ratio_trial = 0;
    double near_extremal_ratio = 0.0;
    std::size_t trials = 0;
    bool pass = false;
};

/**
 * Draws seeded random admissible profiles (sums of 3-6 scaled bumps under a
 * boundary-vanishing envelope), evaluates the Rayleigh ratio of the weighted
 * inequality by radial quadrature with analytic derivatives, and compares the
 * worst ratio against Lambda(n,p)(1 - slack_low). A capped power of the
 * radial p-harmonic profile serves as the near-extremal witness and must stay
 * below Lambda(n,p)(1 + slack_high).
 */
HardyVerdict verify_hardy(const PotentialSpec& spec, std::size_t m, std::size_t trials,
                          std::uint64_t seed, double slack_low = 0.01, double slack_high = 0.05);

/// Exact Rayleigh ratio of one analytic profile (value + derivative sampled
/// at the staggered nodes).
double hardy_rayleigh_ratio(const PotentialSpec& spec, const RadialGrid& grid,
                            std::span<const double> values, std::span<const double> derivatives);

/// Near-extremal profile and its analytic derivative at the nodes: the capped
/// (p-1)/p power of the radial p-harmonic profile r^{-kappa} - R^{-kappa}.
void near_extremal_profile(const PotentialSpec& spec, const RadialGrid& grid, double cap_radius,
                           std::vector<double>& values, std::vector<double>& derivatives);

struct ScalarComparisonOutcome {
    std::size_t trial = 0;
    bool preconditions_ok = false;
    bool ordering_ok = false;
    double max_crossing = 0.0;
};

/// Seeded campaign over random bounded-slope right-hand sides with ordered
/// initial data; both sides are stepped by the implicit scalar solver so the
/// residual preconditions hold by construction.
std::vector<ScalarComparisonOutcome> run_scalar_comparison_campaign(std::size_t trials,
                                                                    std::uint64_t seed,
                                                                    double alpha, double horizon,
                                                                    std::size_t k);

struct PdeComparisonOutcome {
    std::size_t pair = 0;
    bool preconditions_ok = false;
    bool ordering_ok = false;
    double max_crossing = 0.0;
    double residual_gap = 0.0;
};

/// Seeded campaign of ordered-initial-data run pairs under a bounded
/// truncated potential; each pair shares the same evolution.
std::vector<PdeComparisonOutcome> run_pde_comparison_campaign(const ExperimentConfig& base,
                                                              std::size_t pairs,
                                                              std::uint64_t seed);

/// Entry point of the command-line tool. Exit codes: 0 success, 1 usage or
/// validation failure, 2 solver failure, 3 verdict failure.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace fracpde
