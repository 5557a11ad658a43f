#include "fracpde/fode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fracpde {

void FodeProblem::validate() const {
    FracParams{alpha}.validate();
    if (!(q > 1.0) || !std::isfinite(q))
        throw std::invalid_argument("nonlinearity exponent must satisfy q > 1");
    if (!(u0 > 0.0) || !std::isfinite(u0))
        throw std::invalid_argument("initial value must satisfy u0 > 0");
}

const char* to_string(CaseTag tag) {
    switch (tag) {
        case CaseTag::I1: return "I1";
        case CaseTag::I2: return "I2";
        case CaseTag::II: return "II";
    }
    return "?";
}

CaseTag classify_case(double alpha, double q, double tol) {
    FracParams{alpha}.validate();
    if (!(q > 1.0)) throw std::invalid_argument("classification needs q > 1");
    const double s = 1.0 - q * (1.0 - alpha);
    if (std::abs(s) <= tol) return CaseTag::I2;
    return s > 0.0 ? CaseTag::I1 : CaseTag::II;
}

SubsolutionParams choose_delta(const FodeProblem& problem) {
    problem.validate();
    SubsolutionParams out;
    out.case_tag = classify_case(problem.alpha, problem.q);
    if (out.case_tag == CaseTag::II) {
        const double beta = problem.q * (1.0 - problem.alpha) - 1.0;  // > 0
        const double a = (problem.q - 1.0) / (gamma_fn(problem.alpha) * beta);
        out.a = a;
        // delta solves delta^beta = (A/2) w0^{q-1} jointly with
        // w0 = delta^{1-alpha} u0 / 2. The barrier's total driving weight is
        // A delta^{-beta} = 2 w0^{1-q}, twice the amount needed for blow-up,
        // which puts the root of F at t_m = (2^{1/beta} - 1) delta exactly.
        out.delta = std::pow(0.5 * a * std::pow(problem.u0 / 2.0, problem.q - 1.0),
                             -1.0 / problem.alpha);
    } else {
        out.delta = 1.0;
    }
    out.w0 = std::pow(out.delta, 1.0 - problem.alpha) * problem.u0 / 2.0;
    return out;
}

namespace {

// F(t, delta) for s = 1 - q(1-alpha) != 0; w = F^{1/(1-q)}.
double barrier_f(double t, const SubsolutionParams& p, const FodeProblem& prob) {
    const double s = 1.0 - prob.q * (1.0 - prob.alpha);
    const double c = (prob.q - 1.0) / (gamma_fn(prob.alpha) * s);
    return std::pow(p.w0, 1.0 - prob.q) + c * (std::pow(p.delta, s) - std::pow(t + p.delta, s));
}

// F0(t, delta) for the borderline case q(1-alpha) = 1.
double barrier_f0(double t, const SubsolutionParams& p, const FodeProblem& prob) {
    return std::pow(p.w0, 1.0 - prob.q) -
           (prob.q - 1.0) / gamma_fn(prob.alpha) * std::log((t + p.delta) / p.delta);
}

}  // namespace

double subsolution_w(double t, const SubsolutionParams& params, const FodeProblem& problem) {
    problem.validate();
    if (!(t >= 0.0)) throw std::domain_error("barrier evaluated at negative time");
    const double f = (params.case_tag == CaseTag::I2) ? barrier_f0(t, params, problem)
                                                      : barrier_f(t, params, problem);
    if (!(f > 0.0))
        throw std::domain_error("barrier evaluated at or past its blow-up time (t = " +
                                std::to_string(t) + ")");
    return std::pow(f, 1.0 / (1.0 - problem.q));
}

BlowupEstimate blowup_time(const FodeProblem& problem) {
    problem.validate();
    BlowupEstimate est;
    est.params = choose_delta(problem);
    est.case_tag = est.params.case_tag;
    const double alpha = problem.alpha;
    const double q = problem.q;
    const double w0 = est.params.w0;
    switch (est.case_tag) {
        case CaseTag::I1: {
            const double s = 1.0 - q * (1.0 - alpha);  // > 0
            const double base = std::pow(w0, 1.0 - q) * gamma_fn(alpha) * s / (q - 1.0) + 1.0;
            est.t_m = std::pow(base, 1.0 / s) - 1.0;
            // Alternative closed form seen in print: inner sign flipped and
            // the exponent reciprocal negated. Reported alongside when defined.
            const double inner = std::pow(w0, 1.0 - q) * gamma_fn(alpha) * s / (q - 1.0) - 1.0;
            if (inner > 0.0) est.t_m_alt = std::pow(inner, 1.0 / (q * (1.0 - alpha) - 1.0)) - 1.0;
            break;
        }
        case CaseTag::I2:
            est.t_m = std::exp(std::pow(w0, 1.0 - q) * gamma_fn(alpha) / (q - 1.0)) - 1.0;
            break;
        case CaseTag::II: {
            const double beta = q * (1.0 - alpha) - 1.0;  // > 0
            est.t_m = (std::pow(2.0, 1.0 / beta) - 1.0) * est.params.delta;
            break;
        }
    }
    return est;
}

double blowup_f_residual(const BlowupEstimate& est, const FodeProblem& problem) {
    return (est.case_tag == CaseTag::I2) ? barrier_f0(est.t_m, est.params, problem)
                                         : barrier_f(est.t_m, est.params, problem);
}

Trajectory volterra_solve(const FodeProblem& problem, const TimeGrid& grid,
                          double divergence_threshold) {
    problem.validate();
    if (!(divergence_threshold > 0.0))
        throw std::invalid_argument("divergence threshold must be positive");
    const std::size_t K = grid.intervals();
    const double q = problem.q;

    Trajectory traj{grid, std::vector<double>(K + 1, std::numeric_limits<double>::quiet_NaN()),
                    false, std::nullopt};
    traj.values[0] = problem.u0;

    std::vector<double> c(K + 1), fq(K + 1);
    fq[0] = std::pow(problem.u0, q);
    for (std::size_t k = 1; k <= K; ++k) {
        rl_weights_row(grid, FracParams{problem.alpha}, k, c);
        double b = problem.u0;
        for (std::size_t j = 0; j < k; ++j) b += c[j] * fq[j];
        const double ck = c[k];

        // x - ck x^q = b is solvable iff the max of the left side over x > 0,
        // attained at x* = (ck q)^{-1/(q-1)}, is >= b. Losing the root marks
        // numerical blow-up at this node.
        const double xstar = std::pow(1.0 / (ck * q), 1.0 / (q - 1.0));
        auto g = [&](double x) { return x - ck * std::pow(x, q) - b; };
        if (!std::isfinite(b) || g(xstar) < 0.0) {
            traj.blowup_flag = true;
            traj.blowup_index = k;
            return traj;
        }

        double lo = b, hi = xstar;  // g(lo) <= 0 <= g(hi)
        double x = std::clamp(traj.values[k - 1], lo, hi);
        bool converged = false;
        for (int it = 0; it < 200; ++it) {
            const double gx = g(x);
            if (gx > 0.0) hi = x; else lo = x;
            const double gp = 1.0 - ck * q * std::pow(x, q - 1.0);
            double xn = (std::abs(gp) > 1e-300) ? x - gx / gp : 0.5 * (lo + hi);
            if (!(xn >= lo && xn <= hi)) xn = 0.5 * (lo + hi);
            if (std::abs(xn - x) <= 1e-14 * std::max(1.0, std::abs(xn))) {
                x = xn;
                converged = true;
                break;
            }
            x = xn;
        }
        if (!converged && hi - lo > 1e-10 * std::max(1.0, hi))
            throw std::runtime_error("implicit update failed to converge at node " +
                                     std::to_string(k));

        if (x > divergence_threshold) {
            traj.blowup_flag = true;
            traj.blowup_index = k;
            return traj;
        }
        traj.values[k] = x;
        fq[k] = std::pow(x, q);
    }
    return traj;
}

LowerBoundReport lower_bound_check(const Trajectory& traj, const BlowupEstimate& est,
                                   const FodeProblem& problem) {
    problem.validate();
    LowerBoundReport rep;
    const std::size_t stop =
        traj.blowup_index ? *traj.blowup_index : traj.grid.node_count();
    for (std::size_t k = 0; k < stop; ++k) {
        const double t = traj.grid.node(k);
        if (t >= est.t_m) break;
        const double barrier = std::pow(t + est.params.delta, problem.alpha - 1.0) *
                               subsolution_w(t, est.params, problem);
        rep.max_violation = std::max(rep.max_violation, barrier - traj.values[k]);
        ++rep.nodes_checked;
    }
    rep.max_violation = std::max(rep.max_violation, 0.0);
    return rep;
}

Trajectory solve_scalar_l1(const ScalarRhs& rhs, double y0, const TimeGrid& grid,
                           FracParams params) {
    params.validate();
    if (!rhs.f) throw std::invalid_argument("missing right-hand side");
    const std::size_t K = grid.intervals();
    Trajectory traj{grid, std::vector<double>(K + 1, 0.0), false, std::nullopt};
    traj.values[0] = y0;

    const L1Weights weights{grid, params, 0};  // lazy rows; avoids K^2 storage
    std::vector<double> w(K + 1);
    for (std::size_t k = 1; k <= K; ++k) {
        weights.row(k, w);
        const double wkk = w[k];
        double hist = 0.0;
        for (std::size_t j = 0; j < k; ++j) hist += w[j] * traj.values[j];
        const double t = grid.node(k);
        auto g = [&](double y) { return wkk * y + hist - rhs.f(t, y); };

        // Newton from the previous value with a bracket found by expansion.
        double y = traj.values[k - 1];
        double step = std::max(1.0, std::abs(y));
        double lo = y, hi = y;
        double glo = g(lo), ghi = glo;
        for (int tries = 0; tries < 200 && glo * ghi > 0.0; ++tries) {
            lo -= step;
            hi += step;
            step *= 2.0;
            glo = g(lo);
            ghi = g(hi);
            if (glo <= 0.0 && ghi >= 0.0) break;
        }
        if (!(glo <= 0.0 && ghi >= 0.0))
            throw std::runtime_error("scalar implicit step lost its bracket at node " +
                                     std::to_string(k));
        for (int it = 0; it < 200; ++it) {
            const double gy = g(y);
            if (gy > 0.0) hi = y; else lo = y;
            const double h = 1e-7 * std::max(1.0, std::abs(y));
            const double gp = (g(y + h) - g(y - h)) / (2.0 * h);
            double yn = (std::abs(gp) > 1e-300) ? y - gy / gp : 0.5 * (lo + hi);
            if (!(yn >= lo && yn <= hi)) yn = 0.5 * (lo + hi);
            if (std::abs(yn - y) <= 1e-13 * std::max(1.0, std::abs(yn))) {
                y = yn;
                break;
            }
            y = yn;
        }
        traj.values[k] = y;
    }
    return traj;
}

ComparisonReport comparison_check(const ScalarRhs& rhs, FracParams params,
                                  const Trajectory& sub, const Trajectory& sup,
                                  double tol_order, double tol_residual) {
    if (!(sub.grid == sup.grid))
        throw std::invalid_argument("comparison requires both trajectories on the same grid");
    if (!rhs.f) throw std::invalid_argument("missing right-hand side");
    params.validate();
    ComparisonReport rep;
    const TimeGrid& grid = sub.grid;
    const std::size_t K = grid.intervals();

    const std::vector<double> dsub = caputo_apply(sub.values, grid, params);
    const std::vector<double> dsup = caputo_apply(sup.values, grid, params);
    rep.sub_residual_max = -std::numeric_limits<double>::infinity();
    rep.sup_residual_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= K; ++k) {
        const double t = grid.node(k);
        rep.sub_residual_max =
            std::max(rep.sub_residual_max, dsub[k - 1] - rhs.f(t, sub.values[k]));
        rep.sup_residual_min =
            std::min(rep.sup_residual_min, dsup[k - 1] - rhs.f(t, sup.values[k]));
    }
    rep.initial_order_ok = sub.values[0] <= sup.values[0];
    rep.preconditions_ok = rep.initial_order_ok &&
                           rep.sub_residual_max <= tol_residual &&
                           rep.sup_residual_min >= -tol_residual;
    if (!rep.preconditions_ok) return rep;  // precondition report, no verdict

    rep.ordering_ok = true;
    for (std::size_t k = 0; k <= K; ++k) {
        const double gap = sub.values[k] - sup.values[k];
        if (gap > rep.max_crossing) rep.max_crossing = gap;
        if (gap > tol_order && rep.ordering_ok) {
            rep.ordering_ok = false;
            rep.first_violation = k;
        }
    }
    rep.max_crossing = std::max(rep.max_crossing, 0.0);
    return rep;
}

}  // namespace fracpde
