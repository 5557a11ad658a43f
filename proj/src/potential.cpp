#include "fracpde/potential.hpp"

#include <cmath>
#include <string>

#include "fracpde/fracops.hpp"

namespace fracpde {

void RadialDomain::validate() const {
    if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("radius must be positive");
    if (!std::isfinite(n)) throw std::invalid_argument("dimension parameter must be finite");
}

void PotentialSpec::validate() const {
    domain.validate();
    if (!(p > 2.0) || !std::isfinite(p)) throw std::invalid_argument("exponent must satisfy p > 2");
    if (!(domain.n > p))
        throw std::invalid_argument("dimension must satisfy n > p, got n = " +
                                    std::to_string(domain.n) + ", p = " + std::to_string(p));
    if (!(mu >= 0.0) || !std::isfinite(mu))
        throw std::invalid_argument("coupling mu must be nonnegative");
}

double hardy_constant(double n, double p) {
    if (!(p > 1.0) || !(n > p))
        throw std::invalid_argument("hardy constant needs n > p > 1");
    return std::pow((n - p) / p, p);
}

double potential_w(double r, const PotentialSpec& spec) {
    spec.validate();
    const double R = spec.domain.R;
    if (!(r > 0.0) || !(r < R))
        throw std::domain_error("potential is singular outside 0 < r < R, got r = " +
                                std::to_string(r));
    const double s = std::pow(r / R, spec.kappa());
    return std::pow(r, -spec.p) * std::pow(1.0 - s, -spec.p);
}

double potential_w_truncated(double r, const PotentialSpec& spec, double trunc_level) {
    if (!(trunc_level >= 1.0))
        throw std::invalid_argument("truncation level must be >= 1");
    return std::min(trunc_level, potential_w(r, spec));
}

Omega0Result omega0_detail(const PotentialSpec& spec) {
    spec.validate();
    const double R = spec.domain.R;
    // log W is strictly unimodal: (log W)' = (p/r) [kappa s/(1-s) - 1] with
    // s = (r/R)^kappa increasing in r.
    auto logw = [&](double r) {
        const double s = std::pow(r / R, spec.kappa());
        return -spec.p * std::log(r) - spec.p * std::log1p(-s);
    };
    auto dlogw_sign = [&](double r) {
        const double s = std::pow(r / R, spec.kappa());
        return spec.kappa() * s / (1.0 - s) - 1.0;
    };

    double a = 1e-8 * R, b = (1.0 - 1e-8) * R;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = logw(x1), f2 = logw(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * R; ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a); f1 = logw(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a); f2 = logw(x2);
        }
    }
    // Derivative bisection sharpens the minimizer to full precision.
    double lo = std::max(a - 1e-6 * R, 1e-9 * R), hi = std::min(b + 1e-6 * R, (1.0 - 1e-9) * R);
    if (dlogw_sign(lo) < 0.0 && dlogw_sign(hi) > 0.0) {
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (dlogw_sign(mid) < 0.0) lo = mid; else hi = mid;
            if (hi - lo <= 1e-16 * R) break;
        }
    }
    Omega0Result out;
    out.r_star = 0.5 * (lo + hi);
    out.w_min = potential_w(out.r_star, spec);
    return out;
}

double omega0(const PotentialSpec& spec) { return omega0_detail(spec).w_min; }

AprioriConstants apriori_constants(const PotentialSpec& spec, double alpha, double horizon,
                                   double u0_l2_squared) {
    spec.validate();
    FracParams{alpha}.validate();
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(u0_l2_squared >= 0.0)) throw std::invalid_argument("||u0||^2 must be nonnegative");
    const double lambda = hardy_constant(spec.domain.n, spec.p);
    if (!(spec.mu < lambda))
        throw regime_error("energy estimates require mu < Lambda(n,p); got mu = " +
                           std::to_string(spec.mu) + ", Lambda = " + std::to_string(lambda));

    AprioriConstants out;
    out.omega0 = omega0(spec);
    out.epsilon = 0.5 * std::min(out.omega0, lambda - spec.mu);
    out.gamma = 2.0 * (1.0 - (spec.mu + out.epsilon) / lambda);
    out.c3 = 3.0 * std::pow(horizon, 1.0 - alpha) / (1.0 - alpha) * u0_l2_squared;
    out.a1 = out.c3 / out.gamma;
    out.a2 = out.c3 / (2.0 * out.epsilon * out.omega0 * gamma_fn(1.0 - alpha));
    return out;
}

}  // namespace fracpde
