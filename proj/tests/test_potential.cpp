#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fracpde/fracops.hpp"
#include "fracpde/potential.hpp"
#include "oracles.hpp"

using namespace fracpde;

namespace {
const PotentialSpec kSpec{3.0, 0.0, RadialDomain{4.0, 1.0}};
}

TEST_CASE("hardy constant") {
    CHECK(hardy_constant(4.0, 3.0) == doctest::Approx(1.0 / 27.0).epsilon(1e-15));
    CHECK(hardy_constant(6.0, 3.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(hardy_constant(5.0, 2.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(hardy_constant(3.0, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(hardy_constant(2.0, 3.0), std::invalid_argument);
}

TEST_CASE("potential evaluation") {
    SUBCASE("frozen midpoint value") {
        // 8 (1 - 2^{-1/2})^{-3} from the high-precision oracle
        CHECK(potential_w(0.5, kSpec) ==
              doctest::Approx(318.39191898578664547).epsilon(1e-13));
    }
    SUBCASE("singular at both endpoints") {
        CHECK(potential_w(1e-7, kSpec) > 1e20);
        CHECK(potential_w(1.0 - 1e-9, kSpec) > 1e20);
    }
    SUBCASE("domain errors") {
        CHECK_THROWS_AS(potential_w(0.0, kSpec), std::domain_error);
        CHECK_THROWS_AS(potential_w(1.0, kSpec), std::domain_error);
        CHECK_THROWS_AS(potential_w(-0.5, kSpec), std::domain_error);
        CHECK_THROWS_AS(potential_w(1.5, kSpec), std::domain_error);
    }
    SUBCASE("radius scaling") {
        PotentialSpec wide = kSpec;
        wide.domain.R = 2.0;
        CHECK(potential_w(1.0, wide) ==
              doctest::Approx(potential_w(0.5, kSpec) / std::pow(2.0, kSpec.p)).epsilon(1e-13));
    }
    SUBCASE("parameter validation") {
        PotentialSpec bad = kSpec;
        bad.p = 2.0;
        CHECK_THROWS_AS(potential_w(0.5, bad), std::invalid_argument);
        bad = kSpec;
        bad.domain.n = 2.5;  // n <= p
        CHECK_THROWS_AS(potential_w(0.5, bad), std::invalid_argument);
    }
}

TEST_CASE("truncated potential") {
    SUBCASE("clamp activates where the weight is large") {
        CHECK(potential_w_truncated(0.5, kSpec, 100.0) == 100.0);
        CHECK(potential_w_truncated(0.5, kSpec, 1e6) ==
              doctest::Approx(potential_w(0.5, kSpec)).epsilon(1e-15));
    }
    SUBCASE("monotone in the truncation level") {
        for (int i = 1; i < 40; ++i) {
            const double r = i / 40.0;
            const double w10 = potential_w_truncated(r, kSpec, 10.0);
            const double w1000 = potential_w_truncated(r, kSpec, 1000.0);
            CHECK(w10 <= w1000);
            CHECK(w1000 <= potential_w(r, kSpec));
        }
    }
    CHECK_THROWS_AS(potential_w_truncated(0.5, kSpec, 0.5), std::invalid_argument);
}

TEST_CASE("interior minimum of the weight") {
    SUBCASE("closed-form minimizer for n=4, p=3, R=1") {
        const Omega0Result res = omega0_detail(kSpec);
        CHECK(res.r_star == doctest::Approx(4.0 / 9.0).epsilon(1e-10));
        CHECK(res.w_min == doctest::Approx(19683.0 / 64.0).epsilon(1e-12));
    }
    SUBCASE("dense scan oracle") {
        const Omega0Result res = omega0_detail(kSpec);
        double best = std::numeric_limits<double>::infinity();
        for (int i = 1; i < 1000000; ++i) {
            const double r = i / 1000000.0;
            best = std::min(best, potential_w(r, kSpec));
        }
        CHECK(res.w_min == doctest::Approx(best).epsilon(1e-6));
        CHECK(res.w_min <= best + 1e-9);
    }
    SUBCASE("scales as R^{-p}") {
        PotentialSpec wide = kSpec;
        wide.domain.R = 2.0;
        CHECK(omega0(wide) ==
              doctest::Approx(omega0(kSpec) / std::pow(2.0, kSpec.p)).epsilon(1e-10));
    }
}

TEST_CASE("energy-estimate constants") {
    const double lambda = hardy_constant(4.0, 3.0);
    SUBCASE("midpoint epsilon and gamma at mu = Lambda/2") {
        PotentialSpec spec = kSpec;
        spec.mu = 0.5 * lambda;
        const AprioriConstants c = apriori_constants(spec, 0.5, 1.0, 1.0);
        CHECK(c.epsilon == doctest::Approx(lambda / 4.0).epsilon(1e-13));
        CHECK(c.gamma == doctest::Approx(0.5).epsilon(1e-13));
        CHECK(c.c3 == doctest::Approx(6.0).epsilon(1e-13));
        CHECK(c.a1 == doctest::Approx(12.0).epsilon(1e-13));
    }
    SUBCASE("zero data zeroes the bounds") {
        PotentialSpec spec = kSpec;
        spec.mu = 0.5 * lambda;
        const AprioriConstants c = apriori_constants(spec, 0.5, 1.0, 0.0);
        CHECK(c.c3 == 0.0);
        CHECK(c.a1 == 0.0);
        CHECK(c.a2 == 0.0);
    }
    SUBCASE("re-substitution of the defining formulas") {
        PotentialSpec spec = kSpec;
        spec.mu = 0.5 * lambda;
        const double alpha = 0.5, horizon = 1.0, mass = 1.0;
        const AprioriConstants c = apriori_constants(spec, alpha, horizon, mass);
        const double w0 = omega0(spec);
        CHECK(c.omega0 == doctest::Approx(w0).epsilon(1e-12));
        CHECK(c.epsilon == doctest::Approx(0.5 * std::min(w0, lambda - spec.mu)).epsilon(1e-12));
        CHECK(c.gamma ==
              doctest::Approx(2.0 * (1.0 - (spec.mu + c.epsilon) / lambda)).epsilon(1e-12));
        CHECK(c.c3 == doctest::Approx(3.0 * std::pow(horizon, 1.0 - alpha) / (1.0 - alpha) *
                                      mass).epsilon(1e-12));
        CHECK(c.a1 == doctest::Approx(c.c3 / c.gamma).epsilon(1e-12));
        CHECK(c.a2 == doctest::Approx(c.c3 / (2.0 * c.epsilon * c.omega0 *
                                              gamma_fn(1.0 - alpha))).epsilon(1e-12));
        CHECK(c.epsilon > 0.0);
        CHECK(c.epsilon < std::min(w0, lambda - spec.mu));
        CHECK(c.gamma > 0.0);
    }
    SUBCASE("supercritical coupling is rejected") {
        PotentialSpec spec = kSpec;
        spec.mu = lambda;
        CHECK_THROWS_AS(apriori_constants(spec, 0.5, 1.0, 1.0), regime_error);
        spec.mu = 2.0 * lambda;
        CHECK_THROWS_AS(apriori_constants(spec, 0.5, 1.0, 1.0), regime_error);
    }
}

TEST_CASE("weighted inequality holds for random profiles vanishing at both ends") {
    // v = r (R - r) * (random polynomial), quadrature on 1000 staggered nodes
    const std::size_t m = 1000;
    const double R = kSpec.domain.R;
    const double h = R / double(m + 1);
    const double lambda = hardy_constant(4.0, 3.0);
    std::mt19937_64 rng(314159);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        double c0 = coeff(rng), c1 = coeff(rng), c2 = coeff(rng), c3 = coeff(rng);
        if (std::abs(c0) + std::abs(c1) + std::abs(c2) + std::abs(c3) < 0.1) c0 += 0.5;
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double r = (j + 0.5) * h;
            const double poly = c0 + c1 * r + c2 * r * r + c3 * r * r * r;
            const double dpoly = c1 + 2.0 * c2 * r + 3.0 * c3 * r * r;
            const double v = r * (R - r) * poly;
            const double dv = (R - 2.0 * r) * poly + r * (R - r) * dpoly;
            const double w = std::pow(r, 3.0) * h;
            num += std::pow(std::abs(dv), 3.0) * w;
            den += potential_w(r, kSpec) * std::pow(std::abs(v), 3.0) * w;
        }
        CHECK(num >= lambda * den * (1.0 - 0.01));
    }
}

TEST_CASE("non-integer dimension parameters work across the pipeline") {
    // real n near the n > p boundary
    const PotentialSpec spec{2.6, 0.0, RadialDomain{3.1, 1.0}};
    CHECK(hardy_constant(3.1, 2.6) == doctest::Approx(std::pow(0.5 / 2.6, 2.6)).epsilon(1e-13));
    const Omega0Result o = omega0_detail(spec);
    CHECK(o.r_star > 0.0);
    CHECK(o.r_star < 1.0);
    // closed-form minimizer: s* = 1/(1+kappa), r* = s*^{1/kappa}
    const double kap = spec.kappa();
    CHECK(o.r_star == doctest::Approx(std::pow(1.0 / (1.0 + kap), 1.0 / kap)).epsilon(1e-9));
    PotentialSpec sub = spec;
    sub.mu = 0.5 * hardy_constant(3.1, 2.6);
    const AprioriConstants c = apriori_constants(sub, 0.4, 1.0, 1.0);
    CHECK(c.gamma > 0.0);
    CHECK(c.a1 > 0.0);
}
