#pragma once

#include <stdexcept>

namespace fracpde {

/// Parameter regime does not support the requested computation (e.g. the
/// coupling sits on the wrong side of the Hardy threshold).
struct regime_error : std::domain_error {
    using std::domain_error::domain_error;
};

/**
 * Ball of radius R in dimension n. The dimension enters the radial formulas
 * only through r^{n-1} weights and exponents, so n is a real parameter;
 * callers pairing it with an exponent p must keep n > p.
 */
struct RadialDomain {
    double n = 4.0;
    double R = 1.0;

    void validate() const;
};

/// Quasilinear diffusion exponent p > 2 and potential coupling mu >= 0 on a
/// radial domain with n > p.
struct PotentialSpec {
    double p = 3.0;
    double mu = 0.0;
    RadialDomain domain;

    void validate() const;

    /// Exponent of the bracket in the potential: the decay rate (n-p)/(p-1)
    /// of the radial p-harmonic profile r^{-kappa}, which generates the
    /// weight with the sharp constant.
    double kappa() const { return (domain.n - p) / (p - 1.0); }
};

/// Sharp constant Lambda(n, p) = ((n-p)/p)^p of the weighted Hardy inequality.
double hardy_constant(double n, double p);

/// Double-singular weight W(r) = r^{-p} [1 - (r/R)^kappa]^{-p}, unbounded at
/// the origin and at the boundary. Defined for 0 < r < R only.
double potential_w(double r, const PotentialSpec& spec);

/// Truncated weight min(N, W(r)) for truncation levels N >= 1.
double potential_w_truncated(double r, const PotentialSpec& spec, double trunc_level);

struct Omega0Result {
    double r_star = 0.0;  // interior minimizer of W
    double w_min = 0.0;
};

/// Global minimum of W on (0, R): golden-section search on the unimodal
/// radial profile, refined by bisection on the sign of (log W)'.
Omega0Result omega0_detail(const PotentialSpec& spec);
double omega0(const PotentialSpec& spec);

/**
 * Constant pipeline of the energy estimate in the subcritical regime
 * mu < Lambda(n, p):
 *
 *   epsilon = 0.5 min(omega0, Lambda - mu)        (midpoint choice)
 *   gamma   = 2 [1 - (mu + epsilon)/Lambda] > 0
 *   c3      = 3 T^{1-alpha} / (1-alpha) * ||u0||_{L^2}^2
 *   a1      = c3 / gamma
 *   a2      = c3 / (2 epsilon omega0 Gamma(1-alpha))
 */
struct AprioriConstants {
    double epsilon = 0.0;
    double omega0 = 0.0;
    double gamma = 0.0;
    double c3 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
};

AprioriConstants apriori_constants(const PotentialSpec& spec, double alpha, double horizon,
                                   double u0_l2_squared);

}  // namespace fracpde
