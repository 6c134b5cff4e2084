#include "cpdsss/rx.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <string>

#include "cpdsss/analysis.hpp"
#include "cpdsss/errors.hpp"

namespace cpdsss {

namespace {

// FFTW planning is not thread-safe; execution on new arrays is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(cdouble* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

struct Despreader::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

Despreader::Despreader(const ZcBasis& basis) : n_len_(basis.n_len()), plans_(std::make_unique<Plans>()) {
    const auto n = static_cast<std::size_t>(n_len_);
    CVec scratch_in(n), scratch_out(n);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        plans_->forward = fftw_plan_dft_1d(n_len_, as_fftw(scratch_in.data()), as_fftw(scratch_out.data()),
                                           FFTW_FORWARD, flags);
        plans_->backward = fftw_plan_dft_1d(n_len_, as_fftw(scratch_in.data()), as_fftw(scratch_out.data()),
                                            FFTW_BACKWARD, flags);
    }
    if (!plans_->forward || !plans_->backward) throw NumericalError("Despreader: FFTW planning failed");

    CVec z0 = basis.seq();
    conj_spectrum_.resize(n);
    fftw_execute_dft(plans_->forward, as_fftw(z0.data()), as_fftw(conj_spectrum_.data()));
    const double inv_n = 1.0 / static_cast<double>(n_len_);
    for (auto& d : conj_spectrum_) d = std::conj(d) * inv_n;
}

Despreader::~Despreader() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (plans_->forward) fftw_destroy_plan(plans_->forward);
    if (plans_->backward) fftw_destroy_plan(plans_->backward);
}

CVec Despreader::despread(std::span<const cdouble> y) const {
    if (static_cast<int>(y.size()) != n_len_)
        throw InvalidArgument("despread: expected " + std::to_string(n_len_) + " samples, got " +
                              std::to_string(y.size()));
    CVec in(y.begin(), y.end());
    CVec spec(in.size());
    fftw_execute_dft(plans_->forward, as_fftw(in.data()), as_fftw(spec.data()));
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= conj_spectrum_[k];
    fftw_execute_dft(plans_->backward, as_fftw(spec.data()), as_fftw(in.data()));
    return in;
}

CVec despread_full(const ZcBasis& basis, std::span<const cdouble> y) { return Despreader(basis).despread(y); }

CVec despread_direct(const ZcBasis& basis, std::span<const cdouble> y) {
    const int n = basis.n_len();
    if (static_cast<int>(y.size()) != n) throw InvalidArgument("despread_direct: length mismatch");
    CVec out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        cdouble acc{0.0, 0.0};
        for (int m = 0; m < n; ++m) acc += std::conj(basis.at(k, m)) * y[static_cast<std::size_t>(m)];
        out[static_cast<std::size_t>(k)] = acc;
    }
    return out;
}

long long fft_despread_op_count(int n_len) {
    const double lg = std::log2(static_cast<double>(n_len));
    return static_cast<long long>(std::llround(n_len * (1.0 + lg)));
}

long long direct_despread_op_count(int n_len) { return static_cast<long long>(n_len) * n_len; }

DespreadSet extract_user(std::span<const cdouble> yprime, const CodeAssignment& assign, int l_taps) {
    const auto n = static_cast<long>(yprime.size());
    if (n == 0) throw InvalidArgument("extract_user: empty despread vector");
    if (l_taps < 1 || l_taps > n) throw InvalidArgument("extract_user: L must be in [1, N]");
    DespreadSet ds;
    ds.user_id = assign.user_id;
    ds.l_taps = l_taps;
    ds.vectors.reserve(assign.shift_indices.size());
    for (int start : assign.shift_indices) {
        CVec v(static_cast<std::size_t>(l_taps));
        for (long l = 0; l < l_taps; ++l) {
            long idx = (start + l) % n;
            if (idx < 0) idx += n;
            v[static_cast<std::size_t>(l)] = yprime[static_cast<std::size_t>(idx)];
        }
        ds.vectors.push_back(std::move(v));
    }
    return ds;
}

DecisionStats decision_stats(const DespreadSet& ds) {
    const int codes = static_cast<int>(ds.vectors.size());
    if (codes < 2)
        throw UnsupportedConfig("decision_stats: K = 0 gives no statistic pairs; pairwise detection needs K >= 1");
    DecisionStats s;
    s.user_id = ds.user_id;
    s.pairs.reserve(static_cast<std::size_t>(codes * (codes - 1) / 2));
    s.c_values.reserve(s.pairs.capacity());
    for (int i = 0; i < codes; ++i)
        for (int j = i + 1; j < codes; ++j) {
            s.pairs.emplace_back(i, j);
            s.c_values.push_back(std::abs(inner(ds.vectors[static_cast<std::size_t>(i)],
                                                ds.vectors[static_cast<std::size_t>(j)])
                                              .real()));
        }
    return s;
}

int count_exceedances(const DecisionStats& stats, double eta) {
    int count = 0;
    for (double c : stats.c_values)
        if (c > eta) ++count;
    return count;
}

DetectionOutcome detect(const DecisionStats& stats, int m_of_n, double eta) {
    if (m_of_n < 1 || m_of_n > stats.n_pairs())
        throw InvalidArgument("detect: M = " + std::to_string(m_of_n) + " outside [1, " +
                              std::to_string(stats.n_pairs()) + "]");
    DetectionOutcome out;
    out.user_id = stats.user_id;
    out.exceed_count = count_exceedances(stats, eta);
    out.detected = out.exceed_count >= m_of_n;
    return out;
}

DetectionOutcome detect(const DecisionStats& stats, const DetectorDesign& design) {
    return detect(stats, design.m_of_n, design.eta);
}

RecoveredBits recover_bits(const DespreadSet& ds) {
    if (ds.vectors.size() < 2) throw UnsupportedConfig("recover_bits: no information bits (K = 0)");
    RecoveredBits r;
    const auto& ref = ds.vectors.front();
    for (std::size_t i = 1; i < ds.vectors.size(); ++i) {
        const double metric = inner(ref, ds.vectors[i]).real();
        r.soft_metrics.push_back(metric);
        r.hard_bits.push_back(metric < 0.0 ? -1 : 1);
    }
    return r;
}

DetectionOutcome receive_user(std::span<const cdouble> yprime, const CodeAssignment& assign, int l_taps,
                              int m_of_n, double eta) {
    const auto ds = extract_user(yprime, assign, l_taps);
    auto out = detect(decision_stats(ds), m_of_n, eta);
    auto bits = recover_bits(ds);
    out.soft_metrics = std::move(bits.soft_metrics);
    if (out.detected) out.hard_bits = std::move(bits.hard_bits);
    return out;
}

double estimate_noise_power(std::span<const cdouble> y) {
    if (y.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& v : y) acc += std::norm(v);
    return acc / static_cast<double>(y.size());
}

}  // namespace cpdsss
