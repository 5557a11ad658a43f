#pragma once

// Test-side oracles, independent of the library's solution paths.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

/// Bisection root of f on [lo, hi]; requires a sign change.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iters = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw std::runtime_error("bisect: no sign change in bracket");
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

/// Expands [0, hi] until f changes sign, then bisects. f(0) must be positive.
inline double bisect_expanding(const std::function<double(double)>& f, double hi0 = 1.0,
                               double cap = 1e15) {
    double hi = hi0;
    while (f(hi) > 0.0) {
        hi *= 2.0;
        if (hi > cap) throw std::runtime_error("bisect: no root below cap");
    }
    return bisect(f, hi * 0.5 <= 0.0 ? 0.0 : 0.0, hi);
}

/// Two-parameter Mittag-Leffler E_{alpha,1}(z) by the defining series in long
/// double; adequate for |z| up to a few units at test scale.
inline double mittag_leffler(double alpha, double z) {
    long double term = 1.0L, sum = 1.0L;
    for (int j = 1; j < 300; ++j) {
        term = 0.0L;
        // recompute each term from scratch to avoid Gamma-ratio drift
        term = std::pow((long double)z, j) / tgammal(1.0L + alpha * j);
        sum += term;
        if (std::fabs((double)term) < 1e-18 * std::max(1.0, std::fabs((double)sum)) && j > 8)
            break;
    }
    return (double)sum;
}

/// Least-squares slope of log(err) against log(1/k): the empirical order.
inline double ls_order(const std::vector<double>& ks, const std::vector<double>& errs) {
    const std::size_t n = ks.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -std::log(ks[i]);
        const double y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracles
