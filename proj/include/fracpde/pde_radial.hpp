#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracpde/fode.hpp"
#include "fracpde/fracops.hpp"
#include "fracpde/potential.hpp"

namespace fracpde {

/// Surface area of the unit sphere in dimension n (analytic in n).
double sphere_surface_area(double n);

/**
 * Staggered radial mesh of the ball: m interior nodes r_j = (j+1/2) R/(m+1)
 * avoid r = 0 and r = R exactly, so the untruncated potential stays finite at
 * every node. Cell faces sit at j*h; the homogeneous Dirichlet value lives on
 * the ghost node (m+1/2) h past the last face. Quadrature weight of node j is
 * r_j^{n-1} h.
 */
class RadialGrid {
public:
    RadialGrid(std::size_t m, double R, double n);

    std::size_t m() const { return m_; }
    double R() const { return R_; }
    double n() const { return n_; }
    double h() const { return h_; }
    double node(std::size_t j) const { return (static_cast<double>(j) + 0.5) * h_; }
    double face(std::size_t j) const { return static_cast<double>(j) * h_; }
    double ghost_node() const { return (static_cast<double>(m_) + 0.5) * h_; }
    double weight(std::size_t j) const;
    std::vector<double> nodes() const;

    bool operator==(const RadialGrid& other) const = default;

private:
    std::size_t m_;
    double R_, n_, h_;
};

/**
 * Discrete radial quasilinear operator r^{1-n} (r^{n-1} |u'|^{p-2} u')' in
 * flux form on the staggered mesh. Face gradients are regularized through
 * |u'|^2 -> |u'|^2 + sigma^2 (sigma = 0 keeps exact degree p-1 homogeneity).
 * The face at r = 0 carries no flux; the last face couples to the ghost node
 * holding boundary_value.
 */
std::vector<double> p_laplacian_radial(std::span<const double> u, const RadialGrid& grid,
                                       double p, double sigma = 0.0,
                                       double boundary_value = 0.0);

struct BlowupThresholds {
    double l2_cum = 1e6;
    double w1p_cum = 1e6;
};

/**
 * Full discrete problem for the truncated radial evolution.
 *
 * Note on boundary positivity: supercritical blow-up certificates assume
 * data positive up to the boundary, while the boundary condition pins the
 * ghost value to zero. Discretely the initial profile is required positive
 * at the interior nodes only; the last half-cell carries the Dirichlet
 * datum.
 */
struct PdeProblem {
    PotentialSpec spec;
    double alpha = 0.5;
    /// Coefficient truncation level; +infinity means the untruncated weight
    /// evaluated directly at the staggered nodes.
    double trunc_level = 1e4;
    std::vector<double> u0;  // interior nodes, Dirichlet 0 at the ghost node
    TimeGrid tgrid = TimeGrid::uniform(1.0, 100);
    RadialGrid rgrid{100, 1.0, 4.0};
    double sigma = -1.0;  // gradient regularization; < 0 means 1e-8 * R
    BlowupThresholds thresholds;
    double divergence_threshold = 1e12;
    double picard_tol = 1e-10;
    int picard_max_sweeps = 50;

    void validate() const;
    double sigma_effective() const { return sigma < 0.0 ? 1e-8 * rgrid.R() : sigma; }
    /// min(N, W) at the staggered nodes.
    std::vector<double> potential_nodes() const;
};

struct StepRecord {
    double time = 0.0;
    double l2 = 0.0;              // ||u(t)||_{L^2(Omega)}
    double w1p_semi = 0.0;        // ||grad u(t)||_{L^p(Omega)}
    double lp = 0.0;              // ||u(t)||_{L^p(Omega)}
    double potential_energy = 0.0;  // mu * int W_N |u|^p
    double cum_l2_sq = 0.0;       // int_0^t ||u||_{L^2}^2
    double cum_grad_p = 0.0;      // int_0^t ||grad u||_{L^p}^p
    double cum_lp_p = 0.0;        // int_0^t ||u||_{L^p}^p
};

struct RunReport {
    double p = 3.0;
    std::vector<StepRecord> records;
    bool solver_diverged = false;
    std::optional<std::size_t> diverged_index;
    bool blowup = false;
    std::optional<std::size_t> blowup_index;
    double blowup_time = 0.0;
    std::string blowup_reason;
    double picard_residual_max = 0.0;
    double wall_ms = 0.0;

    double l2_cum_norm(std::size_t k) const;
    double w1p_cum_norm(std::size_t k) const;
};

struct PdeRun {
    PdeProblem problem;
    RunReport report;
    std::vector<std::vector<double>> trajectory;  // rows 0..recorded steps
};

/**
 * Single-step driver for the L1-discretized evolution
 * (D^alpha u)_k = Delta_p u_k + mu W_N |u_k|^{p-2} u_k. The quasilinear flux
 * coefficients are frozen per Picard sweep (linear tridiagonal solve each
 * sweep, up to picard_max_sweeps, relative tolerance picard_tol); the lagged
 * potential coefficient is corrected inside the same loop. Non-convergence or
 * a lost/unstable solve marks the step as divergence, which blowup_detect
 * treats as a blow-up signal.
 */
class PdeStepper {
public:
    explicit PdeStepper(PdeProblem problem);

    /// Advances one time node; returns false when the run is finished
    /// (horizon reached, thresholds crossed, or the step solver diverged).
    bool step();
    std::size_t current_index() const { return k_; }
    PdeRun finish();

private:
    void record_step(const std::vector<double>& u, std::size_t k);

    PdeProblem problem_;
    std::vector<double> w_nodes_;
    std::vector<double> face_coeff_;  // face_j^{n-1} r_j^{1-n} / h^2 factors
    std::vector<std::vector<double>> traj_;
    RunReport report_;
    L1Weights weights_;
    std::size_t k_ = 0;
    bool stopped_ = false;
    bool state_nonnegative_ = true;
};

PdeRun solve(const PdeProblem& problem);

struct BlowupVerdict {
    bool blowup = false;
    std::optional<std::size_t> index;
    double time = 0.0;
    std::string reason;
};

/// Earliest node where a cumulative norm crosses its threshold or the step
/// solver diverged. Monotone in the thresholds by construction.
BlowupVerdict blowup_detect(const RunReport& report, const BlowupThresholds& thresholds);

struct EigenOptions {
    int max_iterations = 40000;
    double lambda_tol = 1e-11;
    double residual_tol = 1e-7;  // relative stationarity residual
};

struct EigenResult {
    double lambda = 0.0;
    std::vector<double> profile;  // positive, normalized: int W_N |X|^p r^{n-1} dr = 1
    double residual = 0.0;
    int iterations = 0;
};

/**
 * First eigenvalue of the weighted quasilinear eigenproblem
 * -Delta_p v = lambda W_N |v|^{p-2} v, v = 0 at the boundary: minimizes the
 * discrete Rayleigh quotient by normalized gradient descent (Barzilai-Borwein
 * step seeding with Armijo backtracking) from a positive profile shaped by the
 * extremal asymptotics, then polishes with a bordered Newton iteration.
 */
EigenResult eigen_first(const PotentialSpec& spec, double trunc_level, const RadialGrid& grid,
                        const EigenOptions& opts = {});

struct PositiveProfile {
    std::vector<double> x;
    double residual = 0.0;     // max-norm residual of the semilinear system
    double lambda_n = 0.0;     // first eigenvalue used for the regime check
    int newton_iterations = 0;
};

/**
 * Positive solution X of -Delta_p X - mu W_N |X|^{p-2} X = -X, X = 0 on the
 * boundary. Requires mu > lambda_N (checked through eigen_first); the profile
 * is seeded from the scaled eigenprofile and driven to the stated residual by
 * damped Newton steps that retry with shorter steps on loss of positivity.
 */
PositiveProfile positive_profile_x(const PotentialSpec& spec, double trunc_level,
                                   const RadialGrid& grid, const EigenOptions& eigen_opts = {},
                                   double residual_tol = 1e-9);

struct SeparableSubsolution {
    double eps_scale = 0.0;
    std::vector<double> profile;       // positive X
    Trajectory time_factor;            // T with D^alpha T = T^{p-1}, T(0) = eps
    BlowupEstimate time_blowup;        // certified blow-up time of T
};

/// Largest safe scaling: half the minimum of u0 / X over interior nodes.
double auto_eps_scale(std::span<const double> u0, std::span<const double> x_profile);

/// Pairs T (stepped on the problem's time grid) with the positive profile.
/// Requires eps_scale > 0 and eps_scale * X < u0 strictly at every node; a
/// violation reports the offending node index.
SeparableSubsolution separable_subsolution(const PdeProblem& problem,
                                           const std::vector<double>& x_profile,
                                           double eps_scale);

struct SubsolutionResidualReport {
    double max_residual = 0.0;   // signed max over sampled space-time nodes
    std::size_t time_nodes = 0;
};

/// Residual D^alpha(TX) - Delta_p(TX) - mu W_N |TX|^{p-2} TX of the separable
/// pairing, using degree p-1 homogeneity of the unregularized operator;
/// scanned up to the given time index (exclusive of nonfinite T values).
SubsolutionResidualReport separable_residual_scan(const SeparableSubsolution& sub,
                                                  const PdeProblem& problem,
                                                  std::size_t up_to_index);

struct SubsolutionOrderingReport {
    double max_violation = 0.0;  // max of (T X - u), clipped at 0
    std::optional<std::pair<std::size_t, std::size_t>> first_violation;  // (time, space)
    std::size_t time_nodes = 0;
};

/// Checks T(t_k) X(r_j) <= u(t_k, r_j) + tol on all recorded nodes up to the
/// run's detection index.
SubsolutionOrderingReport subsolution_ordering_check(const PdeRun& run,
                                                     const SeparableSubsolution& sub,
                                                     double tol = 1e-6);

struct PdeComparisonReport {
    bool preconditions_ok = false;
    double residual_gap_max = 0.0;  // max over nodes of res(lower) - res(upper)
    bool initial_order_ok = false;
    bool ordering_ok = false;
    std::optional<std::pair<std::size_t, std::size_t>> first_violation;
    double max_crossing = 0.0;
    std::size_t compared_steps = 0;
};

/**
 * Numerical check of the evolution comparison principle for two runs of the
 * same truncated problem: verifies the initial ordering and the discrete
 * residual ordering (cost O(K^2 m): the Caputo derivative is recomputed along
 * every node column), then scans for the first space-time node where
 * lower > upper + tol.
 */
PdeComparisonReport pde_comparison_check(const PdeRun& lower, const PdeRun& upper,
                                         double tol_order = 1e-8, double tol_residual = 1e-6);

}  // namespace fracpde
