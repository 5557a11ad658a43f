#include "fracpde/pde_radial.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fracpde {

double sphere_surface_area(double n) {
    if (!(n > 0.0)) throw std::invalid_argument("dimension must be positive");
    return 2.0 * std::pow(M_PI, 0.5 * n) / gamma_fn(0.5 * n);
}

RadialGrid::RadialGrid(std::size_t m, double R, double n) : m_(m), R_(R), n_(n) {
    if (m < 2) throw std::invalid_argument("radial grid needs at least 2 interior nodes");
    if (!(R > 0.0) || !(n > 1.0))
        throw std::invalid_argument("radial grid needs R > 0 and n > 1");
    h_ = R / static_cast<double>(m + 1);
}

double RadialGrid::weight(std::size_t j) const { return std::pow(node(j), n_ - 1.0) * h_; }

std::vector<double> RadialGrid::nodes() const {
    std::vector<double> out(m_);
    for (std::size_t j = 0; j < m_; ++j) out[j] = node(j);
    return out;
}

namespace {

// Regularized flux function psi(g) = (g^2 + sigma^2)^{(p-2)/2} g and its
// derivative; both vanish at g = 0 when sigma = 0 (p > 2).
double flux_psi(double g, double p, double sigma) {
    const double s2 = g * g + sigma * sigma;
    if (s2 == 0.0) return 0.0;
    return std::pow(s2, 0.5 * (p - 2.0)) * g;
}

double flux_psi_prime(double g, double p, double sigma) {
    const double s2 = g * g + sigma * sigma;
    if (s2 == 0.0) return 0.0;
    return std::pow(s2, 0.5 * (p - 4.0)) * ((p - 1.0) * g * g + sigma * sigma);
}

// Face gradients g_i = (u_i - u_{i-1})/h, i = 1..m, with u_m = boundary value.
void face_gradients(std::span<const double> u, const RadialGrid& grid, double boundary_value,
                    std::vector<double>& g) {
    const std::size_t m = grid.m();
    const double h = grid.h();
    g.resize(m);
    for (std::size_t i = 1; i < m; ++i) g[i - 1] = (u[i] - u[i - 1]) / h;
    g[m - 1] = (boundary_value - u[m - 1]) / h;
}

/// Solves a tridiagonal system in place; returns false on a negligible pivot
/// or nonfinite values. sub[j] couples row j to j-1, sup[j] to j+1.
bool thomas_solve(std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup,
                  std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t j = 1; j < n; ++j) {
        if (!(std::abs(diag[j - 1]) > 1e-300) || !std::isfinite(diag[j - 1])) return false;
        const double w = sub[j] / diag[j - 1];
        diag[j] -= w * sup[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    if (!(std::abs(diag[n - 1]) > 1e-300) || !std::isfinite(diag[n - 1])) return false;
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) {
        rhs[j] = (rhs[j] - sup[j] * rhs[j + 1]) / diag[j];
        if (!std::isfinite(rhs[j])) return false;
    }
    return std::isfinite(rhs[n - 1]);
}

}  // namespace

std::vector<double> p_laplacian_radial(std::span<const double> u, const RadialGrid& grid,
                                       double p, double sigma, double boundary_value) {
    if (!(p > 2.0)) throw std::invalid_argument("operator requires p > 2");
    if (u.size() != grid.m())
        throw std::invalid_argument("node value count does not match the radial grid");
    const std::size_t m = grid.m();
    const double h = grid.h();
    std::vector<double> g;
    face_gradients(u, grid, boundary_value, g);

    std::vector<double> out(m);
    double flux_lo = 0.0;  // face 0 carries no flux: r^{n-1} vanishes there
    for (std::size_t j = 0; j < m; ++j) {
        const double flux_hi =
            std::pow(grid.face(j + 1), grid.n() - 1.0) * flux_psi(g[j], p, sigma);
        out[j] = std::pow(grid.node(j), 1.0 - grid.n()) * (flux_hi - flux_lo) / h;
        flux_lo = flux_hi;
    }
    return out;
}

void PdeProblem::validate() const {
    spec.validate();
    FracParams{alpha}.validate();
    if (!(trunc_level >= 1.0))
        throw std::invalid_argument("truncation level must be >= 1 (or +inf for untruncated)");
    if (u0.size() != rgrid.m())
        throw std::invalid_argument("initial profile size does not match the radial grid");
    for (double v : u0)
        if (!std::isfinite(v)) throw std::invalid_argument("initial profile must be finite");
    if (rgrid.R() != spec.domain.R || rgrid.n() != spec.domain.n)
        throw std::invalid_argument("radial grid geometry disagrees with the domain spec");
    if (!(thresholds.l2_cum > 0.0) || !(thresholds.w1p_cum > 0.0))
        throw std::invalid_argument("blow-up thresholds must be positive");
    if (!(divergence_threshold > 0.0))
        throw std::invalid_argument("divergence threshold must be positive");
}

std::vector<double> PdeProblem::potential_nodes() const {
    std::vector<double> w(rgrid.m());
    for (std::size_t j = 0; j < rgrid.m(); ++j) {
        const double wr = potential_w(rgrid.node(j), spec);
        w[j] = std::isinf(trunc_level) ? wr : std::min(trunc_level, wr);
    }
    return w;
}

double RunReport::l2_cum_norm(std::size_t k) const { return std::sqrt(records[k].cum_l2_sq); }

double RunReport::w1p_cum_norm(std::size_t k) const {
    return std::pow(records[k].cum_grad_p + records[k].cum_lp_p, 1.0 / p);
}

PdeStepper::PdeStepper(PdeProblem problem)
    : problem_(std::move(problem)),
      weights_(problem_.tgrid, FracParams{problem_.alpha}, 3000) {
    problem_.validate();
    w_nodes_ = problem_.potential_nodes();
    report_.p = problem_.spec.p;
    const RadialGrid& rg = problem_.rgrid;
    face_coeff_.resize(rg.m() + 1);
    for (std::size_t i = 0; i <= rg.m(); ++i)
        face_coeff_[i] = std::pow(rg.face(i), rg.n() - 1.0) / (rg.h() * rg.h());
    state_nonnegative_ = true;
    for (double x : problem_.u0)
        if (x < 0.0) state_nonnegative_ = false;
    traj_.reserve(problem_.tgrid.node_count());
    traj_.push_back(problem_.u0);
    record_step(problem_.u0, 0);
}

void PdeStepper::record_step(const std::vector<double>& u, std::size_t k) {
    const RadialGrid& rg = problem_.rgrid;
    const double p = problem_.spec.p;
    const double area = sphere_surface_area(rg.n());
    StepRecord rec;
    rec.time = problem_.tgrid.node(k);

    double l2sq = 0.0, lpp = 0.0, pot = 0.0;
    for (std::size_t j = 0; j < rg.m(); ++j) {
        const double w = rg.weight(j);
        l2sq += u[j] * u[j] * w;
        lpp += std::pow(std::abs(u[j]), p) * w;
        pot += w_nodes_[j] * std::pow(std::abs(u[j]), p) * w;
    }
    std::vector<double> g;
    face_gradients(u, rg, 0.0, g);
    double gradp = 0.0;
    for (std::size_t i = 1; i <= rg.m(); ++i)
        gradp += std::pow(std::abs(g[i - 1]), p) * std::pow(rg.face(i), rg.n() - 1.0) * rg.h();

    rec.l2 = std::sqrt(area * l2sq);
    rec.lp = std::pow(area * lpp, 1.0 / p);
    rec.w1p_semi = std::pow(area * gradp, 1.0 / p);
    rec.potential_energy = problem_.spec.mu * area * pot;
    if (k == 0) {
        rec.cum_l2_sq = rec.cum_grad_p = rec.cum_lp_p = 0.0;
    } else {
        const StepRecord& prev = report_.records.back();
        const double dt = problem_.tgrid.dt(k);
        rec.cum_l2_sq = prev.cum_l2_sq + rec.l2 * rec.l2 * dt;
        rec.cum_grad_p = prev.cum_grad_p + std::pow(rec.w1p_semi, p) * dt;
        rec.cum_lp_p = prev.cum_lp_p + std::pow(rec.lp, p) * dt;
    }
    report_.records.push_back(rec);
}

bool PdeStepper::step() {
    if (stopped_ || k_ >= problem_.tgrid.intervals()) return false;
    const std::size_t k = ++k_;
    const RadialGrid& rg = problem_.rgrid;
    const std::size_t m = rg.m();
    const double p = problem_.spec.p;
    const double mu = problem_.spec.mu;
    const double sigma = problem_.sigma_effective();

    std::vector<double> wrow(k + 1);
    weights_.row(k, wrow);
    const double wkk = wrow[k];

    // History term of the memory derivative: rhs_j = -sum_{k'<k} w_{k,k'} u_{k'}(r_j).
    std::vector<double> hist(m, 0.0);
    for (std::size_t kp = 0; kp < k; ++kp) {
        const double c = wrow[kp];
        const std::vector<double>& row = traj_[kp];
        for (std::size_t j = 0; j < m; ++j) hist[j] -= c * row[j];
    }

    std::vector<double> v = traj_[k - 1];
    std::vector<double> g, sub(m), diag(m), sup(m), u_star(m);
    bool converged = false;
    // Damped Picard: the undamped frozen-coefficient map oscillates for steep
    // profiles (near -1 linearization eigenvalue); the factor adapts to keep
    // the fixed-point residual shrinking.
    double theta = 1.0;
    double rel = std::numeric_limits<double>::infinity();
    double rel_prev = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < problem_.picard_max_sweeps; ++sweep) {
        face_gradients(v, rg, 0.0, g);
        for (std::size_t j = 0; j < m; ++j) {
            const double rfac = std::pow(rg.node(j), 1.0 - rg.n());
            const double c_lo =
                (j == 0) ? 0.0 : std::pow(g[j - 1] * g[j - 1] + sigma * sigma, 0.5 * (p - 2.0));
            const double c_hi = std::pow(g[j] * g[j] + sigma * sigma, 0.5 * (p - 2.0));
            const double a_lo = c_lo * face_coeff_[j] * rfac;
            const double a_hi = c_hi * face_coeff_[j + 1] * rfac;
            sub[j] = -a_lo;
            sup[j] = -a_hi;
            const double d = std::pow(std::abs(v[j]), p - 2.0);
            diag[j] = wkk + a_lo + a_hi - mu * w_nodes_[j] * d;
            u_star[j] = hist[j];
        }
        if (!thomas_solve(sub, diag, sup, u_star)) {
            report_.solver_diverged = true;
            report_.diverged_index = k;
            break;
        }
        double change = 0.0, scale = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            change = std::max(change, std::abs(u_star[j] - v[j]));
            scale = std::max(scale, std::abs(u_star[j]));
        }
        rel = change / scale;
        if (scale > problem_.divergence_threshold) {
            report_.solver_diverged = true;
            report_.diverged_index = k;
            break;
        }
        if (rel <= problem_.picard_tol) {
            v = u_star;
            converged = true;
            break;
        }
        if (rel > 0.7 * rel_prev) theta = std::max(0.25, 0.5 * theta);
        else theta = std::min(1.0, 1.3 * theta);
        rel_prev = rel;
        for (std::size_t j = 0; j < m; ++j) v[j] += theta * (u_star[j] - v[j]);
    }
    if (!report_.solver_diverged && !converged && rel > 1e3 * problem_.picard_tol) {
        // Picard stalled: treated as a blow-up precursor.
        report_.solver_diverged = true;
        report_.diverged_index = k;
    }
    if (!report_.solver_diverged && state_nonnegative_) {
        // A nonnegative state with nonnegative memory keeps the solution
        // nonnegative while the implicit operator is inverse-positive; a
        // materially negative step means that structure was lost, which is a
        // blow-up precursor.
        double vmin = 0.0, vmax = 1.0;
        for (double x : v) {
            vmin = std::min(vmin, x);
            vmax = std::max(vmax, std::abs(x));
        }
        if (vmin < -1e-8 * vmax) {
            report_.solver_diverged = true;
            report_.diverged_index = k;
        }
    }
    if (report_.solver_diverged) {
        stopped_ = true;
    } else {
        report_.picard_residual_max = std::max(report_.picard_residual_max, rel);
        traj_.push_back(v);
        record_step(v, k);
    }

    const BlowupVerdict verdict = blowup_detect(report_, problem_.thresholds);
    if (verdict.blowup) {
        report_.blowup = true;
        report_.blowup_index = verdict.index;
        report_.blowup_time = verdict.time;
        report_.blowup_reason = verdict.reason;
        stopped_ = true;
    }
    return !stopped_ && k_ < problem_.tgrid.intervals();
}

PdeRun PdeStepper::finish() {
    return PdeRun{std::move(problem_), std::move(report_), std::move(traj_)};
}

PdeRun solve(const PdeProblem& problem) {
    const auto t0 = std::chrono::steady_clock::now();
    PdeStepper stepper(problem);
    while (stepper.step()) {
    }
    PdeRun run = stepper.finish();
    run.report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

BlowupVerdict blowup_detect(const RunReport& report, const BlowupThresholds& thresholds) {
    if (report.records.empty()) throw std::invalid_argument("report has no recorded steps");
    BlowupVerdict v;
    for (std::size_t k = 0; k < report.records.size(); ++k) {
        if (report.l2_cum_norm(k) > thresholds.l2_cum ||
            report.w1p_cum_norm(k) > thresholds.w1p_cum) {
            v.blowup = true;
            v.index = k;
            v.time = report.records[k].time;
            v.reason = report.l2_cum_norm(k) > thresholds.l2_cum ? "l2_cumulative_threshold"
                                                                 : "w1p_cumulative_threshold";
            return v;
        }
    }
    if (report.solver_diverged) {
        v.blowup = true;
        v.index = report.diverged_index;
        v.time = report.records.back().time;
        v.reason = "step_solver_divergence";
    }
    return v;
}

// ---------------------------------------------------------------------------
// Weighted first eigenvalue and the positive profile
// ---------------------------------------------------------------------------

namespace {

struct RayleighWork {
    const RadialGrid& grid;
    std::vector<double> wn;      // truncated potential at nodes
    std::vector<double> wq;      // node quadrature weights r^{n-1} h
    std::vector<double> fw;      // face energy weights f_i^{n-1} h, i = 1..m
    double p;

    RayleighWork(const PotentialSpec& spec, double trunc_level, const RadialGrid& g)
        : grid(g), p(spec.p) {
        const std::size_t m = g.m();
        wn.resize(m);
        wq.resize(m);
        fw.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            const double wr = potential_w(g.node(j), spec);
            wn[j] = std::isinf(trunc_level) ? wr : std::min(trunc_level, wr);
            wq[j] = g.weight(j);
            fw[j] = std::pow(g.face(j + 1), g.n() - 1.0) * g.h();
        }
    }

    double num(const std::vector<double>& v, std::vector<double>& gbuf) const {
        face_gradients(v, grid, 0.0, gbuf);
        double acc = 0.0;
        for (std::size_t i = 0; i < grid.m(); ++i)
            acc += std::pow(std::abs(gbuf[i]), p) * fw[i];
        return acc;
    }

    double den(const std::vector<double>& v) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < grid.m(); ++j)
            acc += wn[j] * std::pow(std::abs(v[j]), p) * wq[j];
        return acc;
    }

    // Unweighted stationarity residual -Delta_p v - lambda W |v|^{p-2} v.
    void residual(const std::vector<double>& v, double lambda, std::vector<double>& out) const {
        out = p_laplacian_radial(v, grid, p, 0.0, 0.0);
        for (std::size_t j = 0; j < grid.m(); ++j)
            out[j] = -out[j] - lambda * wn[j] * std::pow(std::abs(v[j]), p - 2.0) * v[j];
    }
};

double relative_eigen_residual(const RayleighWork& work, const std::vector<double>& v,
                               double lambda, std::vector<double>& buf) {
    work.residual(v, lambda, buf);
    double rmax = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < work.grid.m(); ++j) {
        rmax = std::max(rmax, std::abs(buf[j]));
        scale = std::max(scale, work.wn[j] * std::pow(std::abs(v[j]), work.p - 1.0));
    }
    return rmax / std::max(1e-300, lambda * scale);
}

// One bordered Newton step for the stationarity system with the weighted
// normalization kept as the border row; returns false when the linear solve
// is unusable.
bool eigen_newton_step(const RayleighWork& work, std::vector<double>& v, double& lambda) {
    const std::size_t m = work.grid.m();
    const double p = work.p;
    const double h = work.grid.h();
    std::vector<double> g;
    face_gradients(v, work.grid, 0.0, g);

    std::vector<double> sub(m), diag(m), sup(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double rfac = std::pow(work.grid.node(j), 1.0 - work.grid.n());
        const double c_lo =
            (j == 0) ? 0.0
                     : flux_psi_prime(g[j - 1], p, 0.0) *
                           std::pow(work.grid.face(j), work.grid.n() - 1.0) / (h * h);
        const double c_hi = flux_psi_prime(g[j], p, 0.0) *
                            std::pow(work.grid.face(j + 1), work.grid.n() - 1.0) / (h * h);
        sub[j] = -c_lo * rfac;
        sup[j] = -c_hi * rfac;
        diag[j] = (c_lo + c_hi) * rfac -
                  lambda * (p - 1.0) * work.wn[j] * std::pow(std::abs(v[j]), p - 2.0);
    }
    std::vector<double> res;
    work.residual(v, lambda, res);

    std::vector<double> b(m), y0(m), y1(m);
    for (std::size_t j = 0; j < m; ++j) {
        b[j] = work.wn[j] * std::pow(std::abs(v[j]), p - 2.0) * v[j];
        y0[j] = -res[j];
        y1[j] = b[j];
    }
    {
        std::vector<double> s1 = sub, d1 = diag, p1 = sup;
        if (!thomas_solve(s1, d1, p1, y0)) return false;
    }
    {
        std::vector<double> s2 = sub, d2 = diag, p2 = sup;
        if (!thomas_solve(s2, d2, p2, y1)) return false;
    }
    // Border row keeps den(v) = 1 to first order: dX = y0 + dlambda * y1 with
    // c^T dX = 1 - den(v).
    double cty0 = 0.0, cty1 = 0.0;
    const double s = 1.0 - work.den(v);
    for (std::size_t j = 0; j < m; ++j) {
        const double cj = p * work.wn[j] * std::pow(std::abs(v[j]), p - 2.0) * v[j] * work.wq[j];
        cty0 += cj * y0[j];
        cty1 += cj * y1[j];
    }
    if (!(std::abs(cty1) > 1e-300)) return false;
    const double dlambda = (s - cty0) / cty1;
    for (std::size_t j = 0; j < m; ++j) {
        v[j] += y0[j] + dlambda * y1[j];
        if (!(v[j] > 0.0) || !std::isfinite(v[j])) return false;
    }
    lambda += dlambda;
    return std::isfinite(lambda) && lambda > 0.0;
}

}  // namespace

EigenResult eigen_first(const PotentialSpec& spec, double trunc_level, const RadialGrid& grid,
                        const EigenOptions& opts) {
    spec.validate();
    if (!(trunc_level >= 1.0) && !std::isinf(trunc_level))
        throw std::invalid_argument("truncation level must be >= 1");
    if (grid.R() != spec.domain.R || grid.n() != spec.domain.n)
        throw std::invalid_argument("radial grid geometry disagrees with the domain spec");
    const std::size_t m = grid.m();
    const double p = spec.p;
    RayleighWork work(spec, trunc_level, grid);

    // Positive seed shaped like the extremal: boundary decay (R-r)^{(p-1)/p},
    // interior growth r^{-(n-p)/p} floored at the truncation radius.
    const double floor_r = std::max(
        3.0 * grid.h(),
        std::isinf(trunc_level) ? 0.0 : grid.R() * std::pow(trunc_level, -1.0 / p));
    std::vector<double> v(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double r = grid.node(j);
        v[j] = std::pow(std::max(r, floor_r), -(grid.n() - p) / p) *
               std::pow(grid.R() - r, (p - 1.0) / p);
    }

    std::vector<double> gbuf, lap, grad(m), grad_old(m), v_old(m), trial(m);
    auto rayleigh = [&](const std::vector<double>& x) { return work.num(x, gbuf) / work.den(x); };

    double lambda = rayleigh(v);
    double step = 1e-3;
    int stable = 0;
    int it = 0;
    bool have_prev = false;
    for (; it < opts.max_iterations; ++it) {
        lap = p_laplacian_radial(v, grid, p, 0.0, 0.0);
        const double den = work.den(v);
        for (std::size_t j = 0; j < m; ++j) {
            const double r = -lap[j] - lambda * work.wn[j] * std::pow(std::abs(v[j]), p - 2.0) * v[j];
            grad[j] = p * r / den;  // unweighted residual direction
        }
        if (have_prev) {
            double sy = 0.0, ss = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                const double s = v[j] - v_old[j];
                const double y = grad[j] - grad_old[j];
                sy += s * y;
                ss += s * s;
            }
            if (std::abs(sy) > 1e-300) step = std::clamp(std::abs(ss / sy), 1e-12, 1e10);
        }
        v_old = v;
        grad_old = grad;

        double lam_new = lambda;
        double s = step;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt, s *= 0.5) {
            bool positive = true;
            for (std::size_t j = 0; j < m; ++j) {
                trial[j] = v[j] - s * grad[j];
                if (!(trial[j] > 0.0)) {
                    positive = false;
                    break;
                }
            }
            if (!positive) continue;
            const double lt = rayleigh(trial);
            if (lt < lambda) {
                lam_new = lt;
                accepted = true;
                break;
            }
        }
        if (accepted) {
            const double rel_drop = (lambda - lam_new) / lambda;
            v = trial;
            double vmax = 0.0;
            for (double x : v) vmax = std::max(vmax, x);
            for (auto& x : v) x /= vmax;
            lambda = rayleigh(v);
            stable = rel_drop < opts.lambda_tol ? stable + 1 : 0;
        } else {
            ++stable;
        }
        have_prev = true;
        if (stable >= 12) break;
    }

    // Normalize the weighted p-norm, then polish stationarity.
    const double den = work.den(v);
    for (auto& x : v) x /= std::pow(den, 1.0 / p);
    lambda = rayleigh(v);

    std::vector<double> rbuf;
    double res = relative_eigen_residual(work, v, lambda, rbuf);
    std::vector<double> v_best = v;
    double lam_best = lambda, res_best = res;
    for (int nit = 0; nit < 60 && res > 0.01 * opts.residual_tol; ++nit) {
        if (!eigen_newton_step(work, v, lambda)) break;
        res = relative_eigen_residual(work, v, lambda, rbuf);
        if (res < res_best) {
            res_best = res;
            v_best = v;
            lam_best = lambda;
        } else if (res > 10.0 * res_best) {
            break;
        }
    }
    v = v_best;
    lambda = lam_best;
    res = res_best;

    if (!(res <= opts.residual_tol))
        throw std::runtime_error("eigen solver stagnated: relative residual " +
                                 std::to_string(res) + " after " + std::to_string(it) +
                                 " descent iterations (tolerance " +
                                 std::to_string(opts.residual_tol) + ")");
    for (double x : v)
        if (!(x > 0.0)) throw std::runtime_error("eigen solver lost positivity of the profile");

    const double den2 = work.den(v);
    for (auto& x : v) x /= std::pow(den2, 1.0 / p);
    EigenResult out;
    out.lambda = work.num(v, gbuf) / work.den(v);
    out.profile = std::move(v);
    out.residual = res;
    out.iterations = it;
    return out;
}

PositiveProfile positive_profile_x(const PotentialSpec& spec, double trunc_level,
                                   const RadialGrid& grid, const EigenOptions& eigen_opts,
                                   double residual_tol) {
    EigenResult eig = eigen_first(spec, trunc_level, grid, eigen_opts);
    const double lambda_n = eig.lambda;
    if (!(spec.mu > lambda_n))
        throw regime_error("positive profile requires mu > lambda_N; got mu = " +
                           std::to_string(spec.mu) + ", lambda_N = " + std::to_string(lambda_n));

    const std::size_t m = grid.m();
    const double p = spec.p;
    RayleighWork work(spec, trunc_level, grid);

    // Galerkin-scaled eigenprofile seed: <F(c v), v> = 0 fixes c.
    double v2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) v2 += eig.profile[j] * eig.profile[j] * work.wq[j];
    const double c = std::pow(v2 / (spec.mu - lambda_n), 1.0 / (p - 2.0));
    std::vector<double> x(m);
    for (std::size_t j = 0; j < m; ++j) x[j] = c * eig.profile[j];

    auto eval_f = [&](const std::vector<double>& u, std::vector<double>& f) {
        f = p_laplacian_radial(u, grid, p, 0.0, 0.0);
        for (std::size_t j = 0; j < m; ++j)
            f[j] = -f[j] - spec.mu * work.wn[j] * std::pow(u[j], p - 1.0) + u[j];
    };
    auto norm2 = [&](const std::vector<double>& f) {
        double acc = 0.0;
        for (double y : f) acc += y * y;
        return std::sqrt(acc);
    };

    std::vector<double> f(m), g, sub(m), diag(m), sup(m), d(m), trial(m), ftrial(m);
    eval_f(x, f);
    double fn = norm2(f);
    int it = 0;
    const int max_newton = 200;
    for (; it < max_newton; ++it) {
        double xmax = 0.0, fmax = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            xmax = std::max(xmax, x[j]);
            fmax = std::max(fmax, std::abs(f[j]));
        }
        if (fmax <= residual_tol * std::max(1.0, xmax)) break;

        face_gradients(x, grid, 0.0, g);
        const double h = grid.h();
        for (std::size_t j = 0; j < m; ++j) {
            const double rfac = std::pow(grid.node(j), 1.0 - grid.n());
            const double c_lo =
                (j == 0) ? 0.0
                         : flux_psi_prime(g[j - 1], p, 0.0) *
                               std::pow(grid.face(j), grid.n() - 1.0) / (h * h);
            const double c_hi = flux_psi_prime(g[j], p, 0.0) *
                                std::pow(grid.face(j + 1), grid.n() - 1.0) / (h * h);
            sub[j] = -c_lo * rfac;
            sup[j] = -c_hi * rfac;
            diag[j] = (c_lo + c_hi) * rfac -
                      spec.mu * (p - 1.0) * work.wn[j] * std::pow(x[j], p - 2.0) + 1.0;
            d[j] = -f[j];
        }
        if (!thomas_solve(sub, diag, sup, d))
            throw std::runtime_error("positive profile Newton: singular linearization");

        double t = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 50; ++bt, t *= 0.5) {
            bool positive = true;
            for (std::size_t j = 0; j < m; ++j) {
                trial[j] = x[j] + t * d[j];
                if (!(trial[j] > 0.0)) {
                    positive = false;
                    break;
                }
            }
            if (!positive) continue;  // damping retry on loss of positivity
            eval_f(trial, ftrial);
            if (norm2(ftrial) <= (1.0 - 1e-4 * t) * fn) {
                x = trial;
                f = ftrial;
                fn = norm2(f);
                moved = true;
                break;
            }
        }
        if (!moved)
            throw std::runtime_error("positive profile Newton stalled at iteration " +
                                     std::to_string(it));
    }
    double xmax = 0.0, fmax = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        xmax = std::max(xmax, x[j]);
        fmax = std::max(fmax, std::abs(f[j]));
    }
    if (!(fmax <= residual_tol * std::max(1.0, xmax)))
        throw std::runtime_error("positive profile did not reach the residual tolerance");

    PositiveProfile out;
    out.x = std::move(x);
    out.residual = fmax;
    out.lambda_n = lambda_n;
    out.newton_iterations = it;
    return out;
}

// ---------------------------------------------------------------------------
// Separable subsolution and comparison checks
// ---------------------------------------------------------------------------

double auto_eps_scale(std::span<const double> u0, std::span<const double> x_profile) {
    if (u0.size() != x_profile.size())
        throw std::invalid_argument("profile sizes disagree");
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < u0.size(); ++j) {
        if (!(x_profile[j] > 0.0))
            throw std::invalid_argument("profile must be positive at every node");
        ratio = std::min(ratio, u0[j] / x_profile[j]);
    }
    if (!(ratio > 0.0))
        throw std::invalid_argument("initial data must be positive at interior nodes");
    return 0.5 * ratio;
}

SeparableSubsolution separable_subsolution(const PdeProblem& problem,
                                           const std::vector<double>& x_profile,
                                           double eps_scale) {
    problem.validate();
    if (!(eps_scale > 0.0))
        throw std::invalid_argument("time factor needs a positive initial value");
    if (x_profile.size() != problem.rgrid.m())
        throw std::invalid_argument("profile size does not match the radial grid");
    for (std::size_t j = 0; j < x_profile.size(); ++j)
        if (!(eps_scale * x_profile[j] < problem.u0[j]))
            throw std::invalid_argument(
                "eps * X must stay strictly below the initial data; violated at node " +
                std::to_string(j));

    const FodeProblem tf{problem.alpha, problem.spec.p - 1.0, eps_scale};
    return SeparableSubsolution{eps_scale, x_profile, volterra_solve(tf, problem.tgrid),
                                blowup_time(tf)};
}

SubsolutionResidualReport separable_residual_scan(const SeparableSubsolution& sub,
                                                  const PdeProblem& problem,
                                                  std::size_t up_to_index) {
    problem.validate();
    const std::size_t m = problem.rgrid.m();
    const double p = problem.spec.p;
    const std::vector<double> wn = problem.potential_nodes();

    // Profile residual of the stationary system; the time residual multiplies
    // the exact degree p-1 homogeneity of the unregularized operator.
    std::vector<double> rx = p_laplacian_radial(sub.profile, problem.rgrid, p, 0.0, 0.0);
    for (std::size_t j = 0; j < m; ++j)
        rx[j] = -rx[j] - problem.spec.mu * wn[j] * std::pow(sub.profile[j], p - 1.0) +
                sub.profile[j];

    std::size_t idx = std::min<std::size_t>(up_to_index, problem.tgrid.intervals());
    if (sub.time_factor.blowup_index)
        idx = std::min(idx, *sub.time_factor.blowup_index - 1);
    SubsolutionResidualReport rep;
    rep.time_nodes = idx;
    if (idx < 1) return rep;

    std::vector<double> tnodes(problem.tgrid.nodes().begin(),
                               problem.tgrid.nodes().begin() + idx + 1);
    const TimeGrid prefix = TimeGrid::from_nodes(std::move(tnodes));
    std::vector<double> tvals(sub.time_factor.values.begin(),
                              sub.time_factor.values.begin() + idx + 1);
    const std::vector<double> dt = caputo_apply(tvals, prefix, FracParams{problem.alpha});

    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= idx; ++k) {
        const double tq = std::pow(tvals[k], p - 1.0);
        const double defect = dt[k - 1] - tq;
        for (std::size_t j = 0; j < m; ++j)
            worst = std::max(worst, sub.profile[j] * defect + tq * rx[j]);
    }
    rep.max_residual = worst;
    return rep;
}

SubsolutionOrderingReport subsolution_ordering_check(const PdeRun& run,
                                                     const SeparableSubsolution& sub,
                                                     double tol) {
    SubsolutionOrderingReport rep;
    const std::size_t m = run.problem.rgrid.m();
    std::size_t rows = run.trajectory.size();
    if (sub.time_factor.blowup_index) rows = std::min(rows, *sub.time_factor.blowup_index);
    rep.time_nodes = rows;
    for (std::size_t k = 0; k < rows; ++k) {
        const double t = sub.time_factor.values[k];
        for (std::size_t j = 0; j < m; ++j) {
            const double gap = t * sub.profile[j] - run.trajectory[k][j];
            if (gap > rep.max_violation) rep.max_violation = gap;
            if (gap > tol && !rep.first_violation) rep.first_violation = {k, j};
        }
    }
    rep.max_violation = std::max(rep.max_violation, 0.0);
    return rep;
}

PdeComparisonReport pde_comparison_check(const PdeRun& lower, const PdeRun& upper,
                                         double tol_order, double tol_residual) {
    if (!(lower.problem.tgrid == upper.problem.tgrid) ||
        !(lower.problem.rgrid == upper.problem.rgrid))
        throw std::invalid_argument("comparison requires identical grids");
    if (lower.problem.alpha != upper.problem.alpha ||
        lower.problem.spec.p != upper.problem.spec.p ||
        lower.problem.spec.mu != upper.problem.spec.mu ||
        lower.problem.trunc_level != upper.problem.trunc_level)
        throw std::invalid_argument("comparison requires the same evolution on both sides");

    PdeComparisonReport rep;
    const std::size_t m = lower.problem.rgrid.m();
    const std::size_t rows = std::min(lower.trajectory.size(), upper.trajectory.size());
    rep.compared_steps = rows;
    if (rows < 2) return rep;

    rep.initial_order_ok = true;
    for (std::size_t j = 0; j < m; ++j)
        if (lower.trajectory[0][j] > upper.trajectory[0][j]) {
            rep.initial_order_ok = false;
            break;
        }

    // Discrete residual of each run along every node column.
    std::vector<double> tnodes(lower.problem.tgrid.nodes().begin(),
                               lower.problem.tgrid.nodes().begin() + rows);
    const TimeGrid prefix = TimeGrid::from_nodes(std::move(tnodes));
    const FracParams params{lower.problem.alpha};
    const std::vector<double> wn = lower.problem.potential_nodes();
    const double p = lower.problem.spec.p;
    const double mu = lower.problem.spec.mu;

    auto residual_rows = [&](const PdeRun& run) {
        std::vector<std::vector<double>> res(rows - 1, std::vector<double>(m));
        std::vector<double> col(rows);
        std::vector<std::vector<double>> dcol(m);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k < rows; ++k) col[k] = run.trajectory[k][j];
            dcol[j] = caputo_apply(col, prefix, params);
        }
        const double sigma = run.problem.sigma_effective();
        for (std::size_t k = 1; k < rows; ++k) {
            const std::vector<double> lap =
                p_laplacian_radial(run.trajectory[k], run.problem.rgrid, p, sigma, 0.0);
            for (std::size_t j = 0; j < m; ++j) {
                const double u = run.trajectory[k][j];
                res[k - 1][j] =
                    dcol[j][k - 1] - lap[j] - mu * wn[j] * std::pow(std::abs(u), p - 2.0) * u;
            }
        }
        return res;
    };
    const auto res_lo = residual_rows(lower);
    const auto res_up = residual_rows(upper);
    rep.residual_gap_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < rows; ++k)
        for (std::size_t j = 0; j < m; ++j)
            rep.residual_gap_max = std::max(rep.residual_gap_max, res_lo[k][j] - res_up[k][j]);

    rep.preconditions_ok = rep.initial_order_ok && rep.residual_gap_max <= tol_residual;
    if (!rep.preconditions_ok) return rep;

    rep.ordering_ok = true;
    for (std::size_t k = 0; k < rows; ++k)
        for (std::size_t j = 0; j < m; ++j) {
            const double gap = lower.trajectory[k][j] - upper.trajectory[k][j];
            if (gap > rep.max_crossing) rep.max_crossing = gap;
            if (gap > tol_order && rep.ordering_ok) {
                rep.ordering_ok = false;
                rep.first_violation = {k, j};
            }
        }
    rep.max_crossing = std::max(rep.max_crossing, 0.0);
    return rep;
}

}  // namespace fracpde
