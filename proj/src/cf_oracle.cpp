#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <cmath>
#include <numbers>

#include "cpdsss/analysis.hpp"
#include "cpdsss/errors.hpp"

namespace cpdsss {

double cf_prefold_density(int l_taps, double noise_var, double x) {
    if (l_taps < 1 || !(noise_var > 0.0)) throw DomainError("cf_prefold_density: need L >= 1 and sigma^2 > 0");
    const double a2 = 4.0 / (noise_var * noise_var);
    auto phi = [=](double t) { return std::pow(a2 / (t * t + a2), l_taps); };
    const double w = std::abs(x);
    if (w == 0.0) {
        boost::math::quadrature::exp_sinh<double> integrator;
        return integrator.integrate(phi) / std::numbers::pi;
    }
    boost::math::quadrature::ooura_fourier_cos<double> integrator(1e-12, 8);
    return integrator.integrate(phi, w).first / std::numbers::pi;
}

std::vector<double> cf_inversion_oracle(int l_taps, double noise_var, std::span<const double> x_grid) {
    std::vector<double> out;
    out.reserve(x_grid.size());
    for (double x : x_grid) {
        if (x < 0.0) throw DomainError("cf_inversion_oracle: grid must be nonnegative");
        out.push_back(cf_prefold_density(l_taps, noise_var, x) + cf_prefold_density(l_taps, noise_var, -x));
    }
    return out;
}

}  // namespace cpdsss
