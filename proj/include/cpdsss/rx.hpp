#pragma once

// Base-station receiver: full despreading through the DFT, per-user window
// extraction, pairwise decision statistics, M-out-of-n detection and
// channel-estimation-free bit recovery.

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "cpdsss/tx.hpp"
#include "cpdsss/types.hpp"
#include "cpdsss/zc.hpp"

namespace cpdsss {

struct DetectorDesign;

// Computes y'[n] = z_n^H y for all n as IDFT(DFT(y) .* conj(DFT(z_0))).
// Immutable after construction; despread() may be called from many threads.
class Despreader {
public:
    explicit Despreader(const ZcBasis& basis);
    ~Despreader();
    Despreader(const Despreader&) = delete;
    Despreader& operator=(const Despreader&) = delete;

    int n_len() const noexcept { return n_len_; }
    CVec despread(std::span<const cdouble> y) const;

private:
    struct Plans;
    int n_len_;
    CVec conj_spectrum_;  // diagonal of D, scaled by 1/N
    std::unique_ptr<Plans> plans_;
};

// One-shot FFT despreading. Throws InvalidArgument unless y.size() == N.
CVec despread_full(const ZcBasis& basis, std::span<const cdouble> y);

// The N^2 reference computation of the same quantity.
CVec despread_direct(const ZcBasis& basis, std::span<const cdouble> y);

// Real multiplications of the FFT route, N (1 + log2 N), and of the direct route, N^2.
long long fft_despread_op_count(int n_len);
long long direct_despread_op_count(int n_len);

struct DespreadSet {
    int user_id = 0;
    int l_taps = 0;
    std::vector<CVec> vectors;  // y_{u,0} ... y_{u,K}, each of length L
};

// vectors[k] = yprime[shift_indices[k] ... shift_indices[k] + L - 1], indices modulo N.
DespreadSet extract_user(std::span<const cdouble> yprime, const CodeAssignment& assign, int l_taps);

struct DecisionStats {
    int user_id = 0;
    // c_{i,j} for i < j in lexicographic order (0,1), (0,2), ..., (K-1,K).
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> c_values;
    int n_pairs() const noexcept { return static_cast<int>(c_values.size()); }
};

// c_{i,j} = |Re(y_i^H y_j)|. Throws UnsupportedConfig when K = 0.
DecisionStats decision_stats(const DespreadSet& ds);

struct DetectionOutcome {
    int user_id = 0;
    bool detected = false;
    int exceed_count = 0;
    std::vector<int> hard_bits;        // K entries when detected
    std::vector<double> soft_metrics;  // Re(y_0^H y_i), i = 1..K
};

// Counts the c_{i,j} strictly greater than eta; detected iff the count reaches M.
// Throws InvalidArgument unless 1 <= M <= n_pairs.
int count_exceedances(const DecisionStats& stats, double eta);
DetectionOutcome detect(const DecisionStats& stats, int m_of_n, double eta);
DetectionOutcome detect(const DecisionStats& stats, const DetectorDesign& design);

struct RecoveredBits {
    std::vector<int> hard_bits;
    std::vector<double> soft_metrics;
};

// sgn(Re(y_0^H y_i)) with 0 mapped to +1, plus the unsliced metrics.
RecoveredBits recover_bits(const DespreadSet& ds);

// Full per-user chain on a despread frame: extraction, statistics, detection at
// threshold eta, and bit recovery when detected.
DetectionOutcome receive_user(std::span<const cdouble> yprime, const CodeAssignment& assign, int l_taps,
                              int m_of_n, double eta);

// Mean of |y[m]|^2, or 0 for an empty input.
double estimate_noise_power(std::span<const cdouble> y);

}  // namespace cpdsss
