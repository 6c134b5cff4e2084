#pragma once

// Detection design from the H0 statistics of x = |Re(v_i^H v_j)|, where v_i, v_j
// are independent length-L vectors of CN(0, sigma^2) noise.

#include <iosfwd>
#include <span>
#include <vector>

namespace cpdsss {

// K_{a+1/2}(x) from the terminating half-integer series. Throws DomainError for x <= 0.
double bessel_k_half(int a, double x);

// Density of the folded statistic x >= 0:
//
//   f(x) = (2x/s2)^(L-1/2) K_{L-1/2}(2x/s2) / ((s2/2) 2^(L-3/2) sqrt(pi) Gamma(L)).
//
// In u = 2x/s2 units this is a finite mixture of Gamma(L-k, 1) laws with weights
// C(L-1+k, k) / 2^(L-1+k), k = 0..L-1, which gives the survival function in
// closed form.
class H0Pdf {
public:
    H0Pdf(int l_taps, double noise_var);

    int l_taps() const noexcept { return l_taps_; }
    double noise_var() const noexcept { return noise_var_; }

    double pdf(double x) const;
    double cdf(double x) const;
    double survival(double x) const;  // 1 - cdf, accurate in the far tail

    const std::vector<double>& mixture_weights() const noexcept { return weights_; }

private:
    int l_taps_;
    double noise_var_;
    std::vector<double> weights_;  // weights_[k] multiplies Gamma(L - k)
    double norm_;                  // denominator of the closed form, without the s2/2 factor
    double pdf_at_zero_;
    std::vector<double> log_coef_;  // log-coefficients of u^nu K_nu(u) e^u / sqrt(pi/2) in powers of u
};

double h0_pdf(const H0Pdf& pdf, double x);
double h0_cdf(const H0Pdf& pdf, double x);

// eta with 1 - F(eta) = p0. Throws DomainError unless 0 < p0 < 1.
double solve_threshold(const H0Pdf& pdf, double p0);

// sum_{i=M}^{n} C(n,i) p0^i (1-p0)^(n-i) = I_{p0}(M, n-M+1). Throws DomainError
// unless 1 <= M <= n and 0 <= p0 <= 1.
double pfa_from_p0(double p0, int n, int m);

// Inverse of pfa_from_p0 in p0. Throws DomainError unless 0 < pfa < 1 and
// NumericalError if the iteration cap is reached.
double p0_from_pfa(double pfa, int n, int m);

inline int pair_count(int k_bits) { return k_bits * (k_bits + 1) / 2; }

struct DetectorDesign {
    double target_pfa = 1e-3;
    double p0 = 1e-3;
    double eta = 0.0;
    int m_of_n = 1;
    int n_pairs = 1;
    int k_bits = 1;
    int l_taps = 40;
    double noise_var = 1.0;

    // eta for another noise variance; the H0 law is a scale family in sigma^2.
    double eta_for(double noise_var_other) const { return eta * (noise_var_other / noise_var); }
};

DetectorDesign design_detector(double target_pfa, int k_bits, int m_of_n, int l_taps, double noise_var);

// Columns L,sigma2,K,M,n,p0,eta,target_pfa.
void write_threshold_csv(std::ostream& out, std::span<const DetectorDesign> rows);

// Density of the unfolded statistic Re(v_i^H v_j) by numerically inverting its
// characteristic function ((2/s2)^2 / (t^2 + 4/s2^2))^L.
double cf_prefold_density(int l_taps, double noise_var, double x);

// Folded density prefold(x) + prefold(-x) on a nonnegative grid. Slow; for tests.
std::vector<double> cf_inversion_oracle(int l_taps, double noise_var, std::span<const double> x_grid);

// Fraction of OFDM symbols carrying at least one scheduling request, capped at 1.
double occupancy_fraction(double num_ues, double sr_rate_per_ue, double symbol_rate);
double processing_gain_db(int n_len);
double interference_rise_db(double occupancy, double usr_to_noise_power_ratio);

}  // namespace cpdsss
