#include "cpdsss/selftest.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "cpdsss/analysis.hpp"
#include "cpdsss/rng.hpp"
#include "cpdsss/rx.hpp"
#include "cpdsss/zc.hpp"

namespace cpdsss {

namespace {

using Check = std::function<CheckResult(const SelftestOptions&)>;

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

CheckResult verdict(const char* name, bool ok, const std::string& detail) { return {name, ok, detail}; }

double integrate_0_inf(const std::function<double(double)>& f) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::numeric_limits<double>::infinity(),
                                                                         15, 1e-13);
}

CheckResult zc_orthogonality(const SelftestOptions&) {
    double worst = 0.0;
    for (int n : {16, 64, 1024}) {
        const auto basis = generate_zc(n, 1);
        // z_i^H z_j depends only on j - i for cyclic shifts
        for (int lag = 1; lag < n; ++lag) {
            cdouble acc{0.0, 0.0};
            for (int m = 0; m < n; ++m) acc += std::conj(basis.at(0, m)) * basis.at(lag, m);
            worst = std::max(worst, std::abs(acc));
        }
    }
    return verdict("zc_orthogonality", worst < 1e-10, "max |z_i^H z_j| = " + fmt(worst));
}

CheckResult fft_vs_direct(const SelftestOptions& o) {
    double worst = 0.0;
    for (int n : {16, 64, 256}) {
        const auto basis = generate_zc(n, 1);
        RngStream rng(o.seed, {static_cast<std::uint64_t>(n)});
        CVec y(static_cast<std::size_t>(n));
        for (auto& v : y) v = rng.complex_normal(1.0);
        const auto a = despread_full(basis, y);
        const auto b = despread_direct(basis, y);
        for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    }
    return verdict("fft_vs_direct", worst < 1e-9, "max abs diff = " + fmt(worst));
}

CheckResult pdf_normalization(const SelftestOptions& o) {
    double worst = 0.0;
    try {
        for (int l : {1, 5, 40}) {
            const H0Pdf pdf(l, o.noise_var);
            worst = std::max(worst, std::abs(integrate_0_inf([&](double x) { return pdf.pdf(x); }) - 1.0));
        }
    } catch (const std::exception& e) {
        return verdict("pdf_normalization", false, e.what());
    }
    return verdict("pdf_normalization", worst < 1e-6, "max |int f - 1| = " + fmt(worst));
}

CheckResult pdf_l1_reduction(const SelftestOptions& o) {
    double worst = 0.0;
    try {
        const H0Pdf pdf(1, o.noise_var);
        const double s2 = o.noise_var;
        for (double x : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0})
            worst = std::max(worst, std::abs(pdf.pdf(x * s2) - (2.0 / s2) * std::exp(-2.0 * x)));
    } catch (const std::exception& e) {
        return verdict("pdf_l1_reduction", false, e.what());
    }
    return verdict("pdf_l1_reduction", worst < 1e-10, "max abs diff = " + fmt(worst));
}

CheckResult cdf_closed_form_vs_quadrature(const SelftestOptions& o) {
    double worst = 0.0;
    try {
        for (int l : {1, 5, 40}) {
            const H0Pdf pdf(l, o.noise_var);
            for (double x : {0.5, 2.0, 8.0, 20.0}) {
                const double xs = x * o.noise_var;
                const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                    [&](double t) { return pdf.pdf(t); }, 0.0, xs, 15, 1e-13);
                worst = std::max(worst, std::abs(q - pdf.cdf(xs)));
            }
        }
    } catch (const std::exception& e) {
        return verdict("cdf_closed_form_vs_quadrature", false, e.what());
    }
    return verdict("cdf_closed_form_vs_quadrature", worst < 1e-10, "max abs diff = " + fmt(worst));
}

CheckResult bessel_closed_form(const SelftestOptions&) {
    double worst = 0.0;
    for (double x : {0.5, 1.0, 2.0, 10.0}) {
        const double expect = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
        worst = std::max(worst, std::abs(bessel_k_half(0, x) - expect) / expect);
    }
    return verdict("bessel_closed_form", worst < 1e-12, "max rel err = " + fmt(worst));
}

CheckResult bessel_recurrence(const SelftestOptions&) {
    // K_{a+3/2}(x) = K_{a-1/2}(x) + (2a+1)/x K_{a+1/2}(x)
    double worst = 0.0;
    for (int a = 1; a < 40; ++a)
        for (double x : {0.01, 0.3, 1.0, 7.0, 40.0}) {
            const double lhs = bessel_k_half(a + 1, x);
            const double rhs = bessel_k_half(a - 1, x) + (2.0 * a + 1.0) / x * bessel_k_half(a, x);
            worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
        }
    return verdict("bessel_recurrence", worst < 1e-10, "max rel err = " + fmt(worst));
}

CheckResult beta_roundtrip(const SelftestOptions& o) {
    RngStream rng(o.seed, {0xBE7Aull});
    double worst = 0.0;
    try {
        for (int t = 0; t < 100; ++t) {
            const int n = 1 + static_cast<int>(rng.uniform() * 55.0);
            const int m = 1 + static_cast<int>(rng.uniform() * n);
            const double p0 = std::pow(10.0, -6.0 + 5.0 * rng.uniform());
            const double pfa = pfa_from_p0(p0, n, m);
            if (!(pfa > 0.0 && pfa < 1.0)) continue;
            worst = std::max(worst, std::abs(p0_from_pfa(pfa, n, m) - p0));
        }
    } catch (const std::exception& e) {
        return verdict("beta_roundtrip", false, e.what());
    }
    return verdict("beta_roundtrip", worst < 1e-10, "max |p0 - p0'| = " + fmt(worst));
}

CheckResult threshold_roundtrip(const SelftestOptions& o) {
    double worst = 0.0;
    try {
        for (int l : {1, 5, 40}) {
            const H0Pdf pdf(l, o.noise_var);
            for (double p0 : {0.5, 0.1, 1e-3, 1.8e-5, 1e-8}) {
                const double eta = solve_threshold(pdf, p0);
                worst = std::max(worst, std::abs(pdf.survival(eta) - p0));
            }
        }
    } catch (const std::exception& e) {
        return verdict("threshold_roundtrip", false, e.what());
    }
    return verdict("threshold_roundtrip", worst < 1e-8, "max |1 - F(eta) - p0| = " + fmt(worst));
}

CheckResult calculators(const SelftestOptions&) {
    const double occ = occupancy_fraction(20, 500, 30000);
    const double pg = processing_gain_db(1024);
    const bool ok = std::abs(occ - 1.0 / 3.0) < 1e-15 && std::abs(pg - 30.103) < 1e-3;
    return verdict("calculators", ok, "occupancy = " + fmt(occ) + ", processing gain = " + fmt(pg) + " dB");
}

const std::vector<std::pair<std::string, Check>>& registry() {
    static const std::vector<std::pair<std::string, Check>> checks = {
        {"zc_orthogonality", zc_orthogonality},
        {"fft_vs_direct", fft_vs_direct},
        {"pdf_normalization", pdf_normalization},
        {"pdf_l1_reduction", pdf_l1_reduction},
        {"cdf_closed_form_vs_quadrature", cdf_closed_form_vs_quadrature},
        {"bessel_closed_form", bessel_closed_form},
        {"bessel_recurrence", bessel_recurrence},
        {"beta_roundtrip", beta_roundtrip},
        {"threshold_roundtrip", threshold_roundtrip},
        {"calculators", calculators},
    };
    return checks;
}

}  // namespace

std::vector<std::string> selftest_names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : registry()) out.push_back(name);
    return out;
}

std::vector<CheckResult> run_selftest(const SelftestOptions& opts) {
    std::vector<CheckResult> out;
    for (const auto& [name, check] : registry())
        if (opts.filter.empty() || name.find(opts.filter) != std::string::npos) out.push_back(check(opts));
    return out;
}

}  // namespace cpdsss
