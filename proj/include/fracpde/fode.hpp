#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fracpde/fracops.hpp"

namespace fracpde {

/// Scalar blow-up problem D^alpha u = u^q, u(0) = u0 > 0, q > 1.
struct FodeProblem {
    double alpha = 0.5;
    double q = 2.0;
    double u0 = 1.0;

    void validate() const;
};

/// Sign of 1 - q(1-alpha): I1 positive, I2 zero (within tolerance), II negative.
enum class CaseTag { I1, I2, II };

const char* to_string(CaseTag tag);

/// Classification tolerance: exact equality is measure-zero, nearby parameters
/// route to I1/II by sign.
inline constexpr double kCaseTolerance = 1e-12;

CaseTag classify_case(double alpha, double q, double tol = kCaseTolerance);

/**
 * Parameters of the explicit lower-barrier w(t): the shift delta, the initial
 * value w0 = delta^{1-alpha} u0 / 2, and for case II the constant
 * A = (q-1)/(Gamma(alpha)[q(1-alpha)-1]).
 */
struct SubsolutionParams {
    double delta = 1.0;
    double w0 = 0.0;
    std::optional<double> a;  // case II only
    CaseTag case_tag = CaseTag::I1;
};

/**
 * Blow-up time of the barrier w. t_m solves F(t_m, delta) = 0 (cases I1, II)
 * or F0(t_m, 1) = 0 (case I2). For case I1 the widely-quoted alternative
 * closed form (with the opposite inner sign and reciprocal exponent) is also
 * evaluated when its argument is admissible, for side-by-side reporting.
 */
struct BlowupEstimate {
    double t_m = 0.0;
    CaseTag case_tag = CaseTag::I1;
    SubsolutionParams params;
    std::optional<double> t_m_alt;
};

/// Cases I1/I2 use delta = 1; case II resolves the implicit definition of
/// delta in closed form: delta = [(3A/2)(u0/2)^{q-1}]^{-1/alpha}.
SubsolutionParams choose_delta(const FodeProblem& problem);

/// Barrier value w(t) for 0 <= t < t_m; throws std::domain_error at or past
/// the blow-up time where the defining power becomes nonpositive.
double subsolution_w(double t, const SubsolutionParams& params, const FodeProblem& problem);

BlowupEstimate blowup_time(const FodeProblem& problem);

/// F(t_m, delta) (or F0 for case I2) -- zero at the blow-up time; used to
/// re-assert the estimate invariant.
double blowup_f_residual(const BlowupEstimate& est, const FodeProblem& problem);

/**
 * Node values of a scalar time-fractional solve. On blow-up, blowup_index
 * holds the first node where the node value crossed the divergence threshold
 * or the implicit update lost its root; values from that node on are NaN.
 */
struct Trajectory {
    TimeGrid grid;
    std::vector<double> values;
    bool blowup_flag = false;
    std::optional<std::size_t> blowup_index;
};

/**
 * Steps the integral form u(t_k) = u0 + I^alpha[u^q](t_k) with
 * product-trapezoidal history and an implicit current-node term solved by
 * safeguarded Newton. The implicit equation x - c x^q = b has its physical
 * root below the turning point x* = (c q)^{-1/(q-1)}; when the equation loses
 * its root (b too large) the step is flagged as blow-up.
 */
Trajectory volterra_solve(const FodeProblem& problem, const TimeGrid& grid,
                          double divergence_threshold = 1e9);

struct LowerBoundReport {
    double max_violation = 0.0;  // max over nodes of (barrier - u), clipped at 0
    std::size_t nodes_checked = 0;
};

/// Checks u(t_k) >= (t_k + delta)^{alpha-1} w(t_k) on the nodes before the
/// blow-up flag and before the barrier's own blow-up time.
LowerBoundReport lower_bound_check(const Trajectory& traj, const BlowupEstimate& est,
                                   const FodeProblem& problem);

/// Right-hand side for the generic scalar comparison harness, with the slope
/// bound |df/du| that the comparison theorem assumes.
struct ScalarRhs {
    std::function<double(double, double)> f;
    double lipschitz_bound = 0.0;
};

/// Implicit L1 stepping of D^alpha y = f(t, y): at each node the scalar
/// equation w_kk y - f(t_k, y) = rhs is solved by Newton with a bisection
/// safeguard on a sign-changing bracket.
Trajectory solve_scalar_l1(const ScalarRhs& rhs, double y0, const TimeGrid& grid,
                           FracParams params);

struct ComparisonReport {
    bool preconditions_ok = false;
    // max positive part of D^alpha u - f(t,u) over nodes (should be ~0 for a
    // discrete subsolution) and min of the supersolution residual.
    double sub_residual_max = 0.0;
    double sup_residual_min = 0.0;
    bool initial_order_ok = false;
    bool ordering_ok = false;
    std::optional<std::size_t> first_violation;
    double max_crossing = 0.0;  // max over nodes of (sub - sup), clipped at 0
};

/**
 * Numerical check of the scalar comparison principle: verifies the discrete
 * residual signs and the initial ordering, then scans for the first node where
 * sub > sup + tol. A failed precondition yields a precondition report, not an
 * ordering verdict.
 */
ComparisonReport comparison_check(const ScalarRhs& rhs, FracParams params,
                                  const Trajectory& sub, const Trajectory& sup,
                                  double tol_order = 1e-8, double tol_residual = 1e-8);

}  // namespace fracpde
