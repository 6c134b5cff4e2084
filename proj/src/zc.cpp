#include "cpdsss/zc.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

#include "cpdsss/errors.hpp"

namespace cpdsss {

ZcBasis::ZcBasis(int n_len, int root, CVec seq) : n_len_(n_len), root_(root), seq_(std::move(seq)) {}

cdouble ZcBasis::at(long shift, long m) const noexcept {
    long idx = (m - shift) % n_len_;
    if (idx < 0) idx += n_len_;
    return seq_[static_cast<std::size_t>(idx)];
}

ZcBasis generate_zc(int n_len, int root) {
    if (n_len < 2) throw InvalidArgument("generate_zc: n_len must be >= 2, got " + std::to_string(n_len));
    if (root < 1 || std::gcd(root, n_len) != 1)
        throw InvalidArgument("generate_zc: root " + std::to_string(root) + " is not coprime with N = " +
                              std::to_string(n_len));

    // Phase argument root*n*(n+c) is reduced modulo 2N in integers so large n keep full precision.
    const long long two_n = 2LL * n_len;
    const long long c = (n_len % 2 == 0) ? 0 : 1;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_len));
    CVec seq(static_cast<std::size_t>(n_len));
    for (long long n = 0; n < n_len; ++n) {
        const long long q = (static_cast<long long>(root) * ((n * (n + c)) % two_n)) % two_n;
        const double phase = -std::numbers::pi * static_cast<double>(q) / n_len;
        seq[static_cast<std::size_t>(n)] = std::polar(scale, phase);
    }
    return ZcBasis(n_len, root, std::move(seq));
}

CVec cyclic_shift_unchecked(const ZcBasis& basis, long i) {
    CVec out(static_cast<std::size_t>(basis.n_len()));
    for (long m = 0; m < basis.n_len(); ++m) out[static_cast<std::size_t>(m)] = basis.at(i, m);
    return out;
}

CVec cyclic_shift(const ZcBasis& basis, int i) {
    if (i < 0 || i >= basis.n_len())
        throw InvalidArgument("cyclic_shift: index " + std::to_string(i) + " outside [0, " +
                              std::to_string(basis.n_len()) + ")");
    return cyclic_shift_unchecked(basis, i);
}

cdouble inner(std::span<const cdouble> a, std::span<const cdouble> b) {
    cdouble acc{0.0, 0.0};
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t k = 0; k < n; ++k) acc += std::conj(a[k]) * b[k];
    return acc;
}

std::vector<cdouble> window_product(const ZcBasis& basis, ShiftWindow w1, ShiftWindow w2) {
    if (w1.width != w2.width) throw InvalidArgument("window_product: window widths differ");
    const int n = basis.n_len();
    const int l = w1.width;
    if (l < 1 || l > n) throw InvalidArgument("window_product: width must be in [1, N]");
    for (const auto& w : {w1, w2})
        if (w.start_index < 0 || w.start_index >= n)
            throw InvalidArgument("window_product: window start outside [0, N)");

    std::vector<CVec> cols1, cols2;
    cols1.reserve(static_cast<std::size_t>(l));
    cols2.reserve(static_cast<std::size_t>(l));
    for (int c = 0; c < l; ++c) {
        cols1.push_back(cyclic_shift_unchecked(basis, w1.start_index + c));
        cols2.push_back(cyclic_shift_unchecked(basis, w2.start_index + c));
    }
    std::vector<cdouble> out(static_cast<std::size_t>(l) * static_cast<std::size_t>(l));
    for (int r = 0; r < l; ++r)
        for (int c = 0; c < l; ++c)
            out[static_cast<std::size_t>(r * l + c)] = inner(cols1[static_cast<std::size_t>(r)], cols2[static_cast<std::size_t>(c)]);
    return out;
}

}  // namespace cpdsss
