#include "cpdsss/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "cpdsss/errors.hpp"

namespace cpdsss {

double bessel_k_half(int a, double x) {
    if (a < 0) throw DomainError("bessel_k_half: order index must be >= 0");
    if (!(x > 0.0)) throw DomainError("bessel_k_half: x must be > 0");
    // sum_k (a+k)! / (k! (a-k)!) (2x)^-k by Horner in t = 1/(2x)
    const double t = 0.5 / x;
    std::vector<double> coef(static_cast<std::size_t>(a) + 1);
    coef[0] = 1.0;
    for (int k = 0; k < a; ++k)
        coef[static_cast<std::size_t>(k) + 1] =
            coef[static_cast<std::size_t>(k)] * (a + k + 1.0) * (a - k) / (k + 1.0);
    double sum = 0.0;
    for (int k = a; k >= 0; --k) sum = sum * t + coef[static_cast<std::size_t>(k)];
    return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) * sum;
}

H0Pdf::H0Pdf(int l_taps, double noise_var) : l_taps_(l_taps), noise_var_(noise_var) {
    if (l_taps < 1) throw InvalidArgument("H0Pdf: L must be >= 1");
    if (!(noise_var > 0.0) || !std::isfinite(noise_var)) throw DomainError("H0Pdf: noise variance must be > 0");
    const int a = l_taps - 1;
    weights_.resize(static_cast<std::size_t>(l_taps));
    weights_[0] = std::ldexp(1.0, -a);
    for (int k = 0; k < a; ++k)
        weights_[static_cast<std::size_t>(k) + 1] = weights_[static_cast<std::size_t>(k)] * (a + k + 1.0) / (2.0 * (k + 1.0));
    // u^nu K_nu(u) = sqrt(pi/2) e^-u sum_j d_j u^j, d_j = c_(a-j) 2^-(a-j) with c_k the Bessel coefficients
    log_coef_.resize(static_cast<std::size_t>(l_taps));
    double log_c = 0.0;  // log c_k
    for (int k = 0; k <= a; ++k) {
        if (k > 0) log_c += std::log((a + k) * (a - k + 1.0) / k);
        log_coef_[static_cast<std::size_t>(a - k)] = log_c - k * std::numbers::ln2;
    }
    const double nu = l_taps - 0.5;
    norm_ = std::exp((l_taps - 1.5) * std::numbers::ln2 + 0.5 * std::log(std::numbers::pi) + std::lgamma(l_taps));
    // u^nu K_nu(u) -> Gamma(nu) 2^(nu-1) as u -> 0
    pdf_at_zero_ = (2.0 / noise_var_) * std::exp(std::lgamma(nu) - std::lgamma(static_cast<double>(l_taps))) /
                   std::sqrt(std::numbers::pi);
}

double H0Pdf::pdf(double x) const {
    if (x < 0.0) return 0.0;
    if (x < 1e-8 * noise_var_) return pdf_at_zero_;
    const double u = 2.0 * x / noise_var_;
    const double log_u = std::log(u);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < log_coef_.size(); ++j) top = std::max(top, log_coef_[j] + j * log_u);
    double sum = 0.0;
    for (std::size_t j = 0; j < log_coef_.size(); ++j) sum += std::exp(log_coef_[j] + j * log_u - top);
    const double log_scaled = 0.5 * std::log(std::numbers::pi / 2.0) - u + top + std::log(sum);
    return std::exp(log_scaled - std::log(norm_)) / (noise_var_ / 2.0);
}

double H0Pdf::survival(double x) const {
    if (x <= 0.0) return 1.0;
    const double u = 2.0 * x / noise_var_;
    // Q(m+1, u) = e^-u sum_{j<=m} u^j / j!; Gamma(L - k) has m = L-1-k.
    const double log_u = std::log(u);
    double partial = 0.0;
    double s = 0.0;
    for (int j = 0; j < l_taps_; ++j) {
        partial += std::exp(j * log_u - std::lgamma(j + 1.0) - u);
        s += weights_[static_cast<std::size_t>(l_taps_ - 1 - j)] * partial;
    }
    return std::clamp(s, 0.0, 1.0);
}

double H0Pdf::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    return std::clamp(1.0 - survival(x), 0.0, 1.0);
}

double h0_pdf(const H0Pdf& pdf, double x) { return pdf.pdf(x); }
double h0_cdf(const H0Pdf& pdf, double x) { return pdf.cdf(x); }

double solve_threshold(const H0Pdf& pdf, double p0) {
    if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("solve_threshold: p0 must be in (0, 1)");
    const double s2 = pdf.noise_var();
    auto g = [&](double eta) { return std::log(pdf.survival(eta)) - std::log(p0); };

    double lo = 0.0;
    double hi = s2;
    int grow = 0;
    while (pdf.survival(hi) >= p0) {
        lo = hi;
        hi *= 2.0;
        if (++grow > 200) throw NumericalError("solve_threshold: could not bracket the root");
    }
    // bisection to a narrow bracket, then secant on log survival
    for (int it = 0; it < 60 && hi - lo > 1e-3 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (pdf.survival(mid) >= p0 ? lo : hi) = mid;
    }
    double x0 = lo, x1 = hi;
    double g0 = g(x0), g1 = g(x1);
    for (int it = 0; it < 100; ++it) {
        if (g1 == g0) break;
        double x2 = x1 - g1 * (x1 - x0) / (g1 - g0);
        if (!(x2 > lo && x2 < hi)) x2 = 0.5 * (lo + hi);
        const double g2 = g(x2);
        (g2 > 0.0 ? lo : hi) = x2;
        x0 = x1;
        g0 = g1;
        x1 = x2;
        g1 = g2;
        if (std::abs(x1 - x0) <= 1e-15 * x1 || g2 == 0.0) break;
    }
    return x1;
}

namespace {

double log_binom_term(int n, int i, double log_p, double log_q) {
    return std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * log_p + (n - i) * log_q;
}

struct Tails {
    double upper;  // P(X >= M)
    double lower;  // P(X <= M-1)
};

Tails binomial_tails(double p, int n, int m) {
    if (p <= 0.0) return {0.0, 1.0};
    if (p >= 1.0) return {1.0, 0.0};
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    double upper = 0.0, lower = 0.0;
    for (int i = m; i <= n; ++i) upper += std::exp(log_binom_term(n, i, lp, lq));
    for (int i = 0; i < m; ++i) lower += std::exp(log_binom_term(n, i, lp, lq));
    return {upper, lower};
}

void check_mn(int n, int m, const char* who) {
    if (n < 1 || m < 1 || m > n)
        throw DomainError(std::string(who) + ": need 1 <= M <= n, got M = " + std::to_string(m) +
                          ", n = " + std::to_string(n));
}

}  // namespace

double pfa_from_p0(double p0, int n, int m) {
    check_mn(n, m, "pfa_from_p0");
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw DomainError("pfa_from_p0: p0 must be in [0, 1]");
    const auto t = binomial_tails(p0, n, m);
    return t.upper <= 0.5 ? t.upper : 1.0 - t.lower;
}

double p0_from_pfa(double pfa, int n, int m) {
    check_mn(n, m, "p0_from_pfa");
    if (!(pfa > 0.0 && pfa < 1.0)) throw DomainError("p0_from_pfa: pfa must be in (0, 1)");
    if (m == n) return std::pow(pfa, 1.0 / n);
    if (m == 1) return -std::expm1(std::log1p(-pfa) / n);

    // Safeguarded Newton in s = log p0. The upper tail is used when pfa <= 1/2,
    // the lower tail (as 1 - pfa) otherwise, so both ends keep relative precision.
    const bool use_upper = pfa <= 0.5;
    const double log_target = use_upper ? std::log(pfa) : std::log1p(-pfa);
    auto residual = [&](double s, double& deriv) {
        const double p = std::exp(s);
        const auto t = binomial_tails(p, n, m);
        // d/dp P(X >= M) = n C(n-1, M-1) p^(M-1) (1-p)^(n-M)
        const double log_dens = std::log(static_cast<double>(n)) + log_binom_term(n - 1, m - 1, std::log(p), std::log1p(-p));
        if (use_upper) {
            deriv = std::exp(log_dens - std::log(t.upper)) * p;
            return std::log(t.upper) - log_target;
        }
        deriv = std::exp(log_dens - std::log(t.lower)) * p;
        return log_target - std::log(t.lower);
    };

    double lo = std::log(std::numeric_limits<double>::min());
    double hi = 0.0;
    double s = std::log(std::max(std::pow(pfa, 1.0 / m) / n, 1e-300));
    s = std::clamp(s, lo, -1e-300);
    for (int it = 0; it < 400; ++it) {
        double d = 0.0;
        const double r = residual(s, d);
        if (!std::isfinite(r)) {
            // tail underflow: the root is toward the interior
            lo = s;
            s = 0.5 * (lo + hi);
            continue;
        }
        if (r == 0.0) return std::exp(s);
        (r > 0.0 ? hi : lo) = s;
        double next = (d > 0.0 && std::isfinite(d)) ? s - r / d : 0.5 * (lo + hi);
        if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) <= 1e-15 * std::max(1.0, std::abs(s))) return std::exp(next);
        s = next;
    }
    throw NumericalError("p0_from_pfa: no convergence for pfa = " + std::to_string(pfa) + ", n = " +
                         std::to_string(n) + ", M = " + std::to_string(m));
}

DetectorDesign design_detector(double target_pfa, int k_bits, int m_of_n, int l_taps, double noise_var) {
    if (k_bits < 1) throw UnsupportedConfig("design_detector: pairwise detection needs K >= 1");
    DetectorDesign d;
    d.target_pfa = target_pfa;
    d.k_bits = k_bits;
    d.n_pairs = pair_count(k_bits);
    d.m_of_n = m_of_n;
    d.l_taps = l_taps;
    d.noise_var = noise_var;
    d.p0 = p0_from_pfa(target_pfa, d.n_pairs, m_of_n);
    d.eta = solve_threshold(H0Pdf(l_taps, noise_var), d.p0);
    return d;
}

void write_threshold_csv(std::ostream& out, std::span<const DetectorDesign> rows) {
    out << "L,sigma2,K,M,n,p0,eta,target_pfa\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%d,%d,%d,%.17g,%.17g,%.17g\n", r.l_taps, r.noise_var, r.k_bits,
                      r.m_of_n, r.n_pairs, r.p0, r.eta, r.target_pfa);
        out << buf;
    }
}

double occupancy_fraction(double num_ues, double sr_rate_per_ue, double symbol_rate) {
    if (num_ues < 0.0 || sr_rate_per_ue < 0.0 || !(symbol_rate > 0.0))
        throw DomainError("occupancy_fraction: rates must be nonnegative and symbol_rate > 0");
    return std::min(1.0, num_ues * sr_rate_per_ue / symbol_rate);
}

double processing_gain_db(int n_len) {
    if (n_len < 1) throw DomainError("processing_gain_db: N must be >= 1");
    return 10.0 * std::log10(static_cast<double>(n_len));
}

double interference_rise_db(double occupancy, double usr_to_noise_power_ratio) {
    if (occupancy < 0.0 || usr_to_noise_power_ratio < 0.0)
        throw DomainError("interference_rise_db: inputs must be nonnegative");
    return 10.0 * std::log10(1.0 + occupancy * usr_to_noise_power_ratio);
}

}  // namespace cpdsss
