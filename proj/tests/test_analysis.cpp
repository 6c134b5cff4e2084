#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "cpdsss/analysis.hpp"
#include "cpdsss/errors.hpp"

using namespace cpdsss;

TEST_CASE("half-integer Bessel K against Boost") {
    double worst = 0.0;
    for (int a = 0; a <= 60; ++a)
        for (double x : {1e-3, 0.05, 0.5, 1.0, 3.0, 10.0, 50.0, 300.0}) {
            const double ref = boost::math::cyl_bessel_k(a + 0.5, x);
            if (!std::isfinite(ref) || ref == 0.0) continue;
            worst = std::max(worst, std::abs(bessel_k_half(a, x) - ref) / ref);
        }
    CHECK(worst < 1e-12);
    CHECK_THROWS_AS(bessel_k_half(0, 0.0), DomainError);
    CHECK_THROWS_AS(bessel_k_half(2, -1.0), DomainError);
}

TEST_CASE("H0 density integrates to one") {
    for (int l : {1, 2, 5, 40, 64})
        for (double s2 : {0.25, 1.0, 3.0}) {
            const H0Pdf f(l, s2);
            const double total = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                [&](double x) { return f.pdf(x); }, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        }
}

TEST_CASE("L = 1 reduces to a scaled exponential") {
    for (double s2 : {0.5, 1.0, 2.0}) {
        const H0Pdf f(1, s2);
        for (double x : {0.0, 1e-12, 0.1, 1.0, 4.0}) {
            CHECK(std::abs(f.pdf(x) - (2.0 / s2) * std::exp(-2.0 * x / s2)) < 1e-10);
            CHECK(std::abs(f.survival(x) - std::exp(-2.0 * x / s2)) < 1e-14);
        }
    }
}

TEST_CASE("density agrees with characteristic function inversion") {
    for (int l : {1, 5, 40}) {
        const H0Pdf f(l, 1.0);
        std::vector<double> grid;
        for (double x = 0.25; x < 4.0 * std::sqrt(double(l)) + 4.0; x += 0.5) grid.push_back(x);
        const auto cf = cf_inversion_oracle(l, 1.0, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(cf[i] - f.pdf(grid[i])) < 1e-4);
    }
}

TEST_CASE("density is continuous at zero") {
    for (int l : {1, 3, 40}) {
        const H0Pdf f(l, 2.0);
        const double lim = (2.0 / 2.0) * std::tgamma(l - 0.5) / (std::sqrt(std::numbers::pi) * std::tgamma(double(l)));
        CHECK(f.pdf(0.0) == doctest::Approx(lim).epsilon(1e-12));
        CHECK(f.pdf(1e-6) == doctest::Approx(lim).epsilon(1e-5));
        CHECK(f.cdf(0.0) == 0.0);
    }
}

TEST_CASE("closed-form CDF against quadrature and complementarity") {
    for (int l : {1, 5, 40}) {
        const H0Pdf f(l, 1.5);
        double wsum = 0.0;
        for (double w : f.mixture_weights()) wsum += w;
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));
        for (double x : {0.1, 1.0, 5.0, 15.0, 30.0}) {
            const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                [&](double t) { return f.pdf(t); }, 0.0, x, 15, 1e-14);
            CHECK(std::abs(f.cdf(x) - q) < 1e-10);
            CHECK(std::abs(f.cdf(x) + f.survival(x) - 1.0) < 1e-14);
            CHECK(h0_cdf(f, x) == f.cdf(x));
            CHECK(h0_pdf(f, x) == f.pdf(x));
        }
    }
}

TEST_CASE("H0 law is a scale family in sigma^2") {
    const H0Pdf a(40, 1.0), b(40, 3.7);
    for (double x : {1.0, 10.0, 25.0}) {
        CHECK(b.survival(3.7 * x) == doctest::Approx(a.survival(x)).epsilon(1e-13));
        CHECK(3.7 * b.pdf(3.7 * x) == doctest::Approx(a.pdf(x)).epsilon(1e-12));
    }
}

TEST_CASE("H0 density against Monte Carlo of Gaussian vectors") {
    // |Re(v^H w)| with v, w iid CN(0, s2 I_L)
    const int l = 5;
    const double s2 = 2.0;
    std::mt19937_64 eng(12345);
    std::normal_distribution<double> g(0.0, std::sqrt(s2 / 2.0));
    const int n = 200000;
    const H0Pdf f(l, s2);
    int above = 0;
    const double x0 = 3.0;
    for (int t = 0; t < n; ++t) {
        double re = 0.0;
        for (int i = 0; i < l; ++i) {
            const double vr = g(eng), vi = g(eng), wr = g(eng), wi = g(eng);
            re += vr * wr + vi * wi;
        }
        if (std::abs(re) > x0) ++above;
    }
    const double p = f.survival(x0);
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(above / double(n) - p) < 4.0 * se);
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(H0Pdf(0, 1.0), InvalidArgument);
    CHECK_THROWS(H0Pdf(5, 0.0));
    CHECK_THROWS(H0Pdf(5, -1.0));
}

TEST_CASE("threshold solves the exceedance equation") {
    for (int l : {1, 5, 40})
        for (double p0 : {0.9, 0.5, 1e-2, 1e-4, 1.8e-5, 1e-10, 1e-14}) {
            const H0Pdf f(l, 1.0);
            const double eta = solve_threshold(f, p0);
            CHECK(f.survival(eta) == doctest::Approx(p0).epsilon(1e-9));
        }
    CHECK(solve_threshold(H0Pdf(1, 1.0), 0.01) == doctest::Approx(0.5 * std::log(100.0)).epsilon(1e-12));
    CHECK_THROWS(solve_threshold(H0Pdf(5, 1.0), 0.0));
    CHECK_THROWS(solve_threshold(H0Pdf(5, 1.0), 1.0));
}

TEST_CASE("binomial tail against the regularized incomplete beta") {
    for (int n : {1, 3, 10, 55})
        for (int m = 1; m <= n; ++m)
            for (double p : {1e-6, 1e-3, 0.05, 0.3, 0.7}) {
                // P(X >= M) = I_p(M, n - M + 1)
                const double ref = boost::math::ibeta(m, n - m + 1, p);
                const double got = pfa_from_p0(p, n, m);
                if (ref < 1e-290) continue;
                CHECK(got == doctest::Approx(ref).epsilon(1e-11));
            }
}

TEST_CASE("inverse against Boost ibeta_inv") {
    for (int n : {3, 10, 55})
        for (int m : {1, 2, n / 2 + 1, n})
            for (double pfa : {1e-8, 1e-3, 0.1, 0.5, 0.9, 0.999}) {
                const double ref = boost::math::ibeta_inv(m, n - m + 1, pfa);
                CHECK(p0_from_pfa(pfa, n, m) == doctest::Approx(ref).epsilon(1e-10));
            }
    CHECK(p0_from_pfa(1e-3, 55, 1) == doctest::Approx(-std::expm1(std::log1p(-1e-3) / 55)).epsilon(1e-15));
    CHECK(p0_from_pfa(1e-3, 55, 55) == doctest::Approx(std::pow(1e-3, 1.0 / 55)).epsilon(1e-15));
    CHECK_THROWS_AS(p0_from_pfa(1.5, 10, 1), DomainError);
    CHECK_THROWS_AS(p0_from_pfa(0.0, 10, 1), DomainError);
    CHECK_THROWS(p0_from_pfa(0.1, 10, 11));
    CHECK_THROWS(p0_from_pfa(0.1, 10, 0));
}

TEST_CASE("p0 round trip over random cases") {
    std::mt19937_64 eng(99);
    std::uniform_int_distribution<int> nd(1, 55);
    std::uniform_real_distribution<double> ld(-12.0, -0.05);
    for (int t = 0; t < 500; ++t) {
        const int n = nd(eng);
        const int m = std::uniform_int_distribution<int>(1, n)(eng);
        const double p0 = std::pow(10.0, ld(eng));
        const double pfa = pfa_from_p0(p0, n, m);
        // near pfa = 1 the double value of pfa no longer pins down p0
        if (!(pfa > 1e-300 && pfa <= 0.999)) continue;
        CHECK(std::abs(p0_from_pfa(pfa, n, m) - p0) <= 1e-10 * std::max(1.0, p0));
    }
}

TEST_CASE("detector design") {
    const auto d = design_detector(1e-3, 10, 1, 40, 1.0);
    CHECK(d.n_pairs == 55);
    CHECK(d.p0 == p0_from_pfa(1e-3, 55, 1));
    CHECK(H0Pdf(40, 1.0).survival(d.eta) == doctest::Approx(d.p0).epsilon(1e-9));
    CHECK(d.eta_for(2.0) == doctest::Approx(2.0 * d.eta));

    const auto l1 = design_detector(0.01, 1, 1, 1, 1.0);
    CHECK(l1.eta == doctest::Approx(2.302585).epsilon(1e-6));
    CHECK_THROWS_AS(design_detector(1e-3, 0, 1, 40, 1.0), UnsupportedConfig);

    std::ostringstream ss;
    const std::vector<DetectorDesign> rows{l1};
    write_threshold_csv(ss, rows);
    CHECK(ss.str().rfind("L,sigma2,K,M,n,p0,eta,target_pfa\n1,1,1,1,1,0.01,", 0) == 0);
}

TEST_CASE("system calculators") {
    CHECK(occupancy_fraction(20, 500, 30000) == 1.0 / 3.0);
    CHECK(occupancy_fraction(1000, 500, 30000) == 1.0);
    CHECK(occupancy_fraction(0, 500, 30000) == 0.0);
    CHECK(std::abs(processing_gain_db(1024) - 30.103) < 1e-3);
    CHECK(interference_rise_db(0.0, 5.0) == 0.0);
    CHECK(interference_rise_db(1.0 / 3.0, 0.03) == doctest::Approx(10.0 * std::log10(1.01)));
    CHECK_THROWS(occupancy_fraction(1, 1, 0));
    CHECK_THROWS(processing_gain_db(0));
}

TEST_CASE("worked analytic values") {
    CHECK(bessel_k_half(0, 1.0) == doctest::Approx(0.461068).epsilon(1e-6));
    // integral representation K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt
    const double integ = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double t) { return 0.5 * (std::exp(0.5 * t - std::cosh(t)) + std::exp(-0.5 * t - std::cosh(t))); }, 0.0,
        std::numeric_limits<double>::infinity(), 15, 1e-14);
    CHECK(bessel_k_half(0, 1.0) == doctest::Approx(integ).epsilon(1e-12));
    for (double x : {0.5, 2.0, 10.0})
        CHECK(std::abs(bessel_k_half(0, x) - std::sqrt(std::numbers::pi / (2 * x)) * std::exp(-x)) <
              1e-12 * bessel_k_half(0, x));
    for (double x : {1e-3, 0.1, 1.0, 7.5, 25.0, 50.0}) {
        // same representation for nu = 39.5, shifted by the integrand's peak to stay finite
        const double nu = 39.5;
        const double tp = std::asinh(nu / x);
        const double shift = nu * tp - x * std::cosh(tp);
        const double integ39 = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double t) { return 0.5 * (std::exp(nu * t - x * std::cosh(t) - shift) + std::exp(-nu * t - x * std::cosh(t) - shift)); },
            0.0, std::numeric_limits<double>::infinity(), 20, 1e-15);
        const double log_ref = shift + std::log(integ39);
        CHECK(std::abs(std::log(bessel_k_half(39, x)) - log_ref) < 1e-9);
    }

    const H0Pdf f1(1, 1.0);
    CHECK(f1.pdf(0.5) == doctest::Approx(0.735759).epsilon(1e-6));
    CHECK(f1.cdf(1.0) == doctest::Approx(0.864665).epsilon(1e-6));
    CHECK(solve_threshold(H0Pdf(40, 1.0), 1.0 - 1e-12) < 1e-2);

    CHECK(pfa_from_p0(0.37, 1, 1) == doctest::Approx(0.37));
    CHECK(pfa_from_p0(0.1, 3, 2) == doctest::Approx(0.028).epsilon(1e-13));
    CHECK(pfa_from_p0(0.3, 5, 5) == doctest::Approx(std::pow(0.3, 5)).epsilon(1e-13));
    CHECK(p0_from_pfa(0.001, 1, 1) == doctest::Approx(0.001).epsilon(1e-14));
    CHECK(p0_from_pfa(0.028, 3, 2) == doctest::Approx(0.1).epsilon(1e-12));

    CHECK(processing_gain_db(1024) == doctest::Approx(30.10).epsilon(1e-3));
    CHECK(interference_rise_db(1.0 / 3.0, 0.01) == doctest::Approx(0.0145).epsilon(1e-2));
}

TEST_CASE("characteristic function oracle details") {
    // L = 1 folded density is 2 e^{-2x}
    std::vector<double> grid;
    for (double x = 0.1; x < 6.0; x += 0.3) grid.push_back(x);
    const auto f = cf_inversion_oracle(1, 1.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(f[i] - 2.0 * std::exp(-2.0 * grid[i])) < 1e-6);
    for (double x : {0.3, 1.7, 4.0}) CHECK(cf_prefold_density(5, 1.0, x) == doctest::Approx(cf_prefold_density(5, 1.0, -x)));
    std::vector<double> g40;
    for (double x = 0.0; x <= 20.0; x += 0.5) g40.push_back(x);
    const auto o40 = cf_inversion_oracle(40, 1.0, g40);
    const H0Pdf h40(40, 1.0);
    for (std::size_t i = 0; i < g40.size(); ++i) CHECK(std::abs(o40[i] - h40.pdf(g40[i])) < 1e-4);
}
