#pragma once

// Deterministic Monte Carlo experiments: statistic distributions, false alarm,
// miss detection, ROC and uncoded BER.
//
// Every trial draws from its own stream RngStream(seed, {case, point, hypothesis,
// trial}) and results are reduced in trial order, so output is independent of
// the worker count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "cpdsss/analysis.hpp"
#include "cpdsss/channel.hpp"
#include "cpdsss/rng.hpp"
#include "cpdsss/rx.hpp"
#include "cpdsss/tx.hpp"
#include "cpdsss/zc.hpp"

namespace cpdsss {

enum class ExperimentKind { Dist, Pfa, Pmd, Roc, Ber };
enum class ThresholdMode { AnalyticTrueSigma, AnalyticEstSigma };
enum class BerMode { Genie, Detected };

std::string to_string(ExperimentKind k);
std::string to_string(ThresholdMode m);
std::string to_string(BerMode m);
ExperimentKind parse_experiment_kind(const std::string& s);
ThresholdMode parse_threshold_mode(const std::string& s);
BerMode parse_ber_mode(const std::string& s);

struct SimCase {
    int k_bits = 1;
    int m_of_n = 1;
};

struct ExperimentConfig {
    std::string experiment = "run";
    ExperimentKind kind = ExperimentKind::Pfa;
    int n_len = 1024;
    int cp_len = 72;
    int l_taps = 40;
    int zc_root = 1;
    std::vector<SimCase> cases{{1, 1}};
    double target_pfa = 1e-3;
    std::vector<double> snr_grid_db{-12.0};
    long num_trials = 10000;
    ChannelProfile channel;
    std::string tdl_table;  // empty: shipped table
    double noise_var = 1.0;
    std::uint64_t seed = 1;
    ThresholdMode threshold_mode = ThresholdMode::AnalyticEstSigma;
    BerMode ber_mode = BerMode::Genie;
    std::vector<double> roc_pfa_grid{1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1};
    int histogram_bins = 50;
};

struct ResultRow {
    std::string experiment;
    std::string kind;
    std::optional<double> snr_db;
    int k_bits = 0;
    int m_of_n = 0;
    std::string metric;
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long trials = 0;
    std::uint64_t seed = 0;
};

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string code_version;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    Provenance provenance;

    // First row matching metric (and snr/k when given).
    const ResultRow* find(const std::string& metric, std::optional<double> snr_db = std::nullopt,
                          std::optional<int> k_bits = std::nullopt, std::optional<int> m_of_n = std::nullopt) const;
};

extern const char* const kCodeVersion;

// 95% Wilson score interval for `successes` out of `trials`.
struct Interval {
    double low = 0.0;
    double high = 1.0;
};
Interval wilson_interval(long successes, long trials, double z = 1.959963984540054);

// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
double ks_distance(std::vector<double> a, std::vector<double> b);
// One-sample distance sup |F_n - F| against a model CDF.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);
// Asymptotic 1% critical values.
double ks_critical_1pct(std::size_t n);
double ks_critical_1pct(std::size_t n, std::size_t m);

// (pfa, pd) for each threshold: fraction of scores strictly above it.
struct RocPoint {
    double threshold = 0.0;
    double pfa = 0.0;
    double pd = 0.0;
};
std::vector<RocPoint> empirical_roc(std::span<const double> h0_scores, std::span<const double> h1_scores,
                                    std::span<const double> thresholds);

// Runs fn(i) for i in [0, count) on `jobs` threads (0 = hardware concurrency)
// and returns the results in index order.
template <class T, class Fn>
std::vector<T> parallel_trials(long count, unsigned jobs, Fn&& fn);

// Everything a trial needs that is fixed for one (L, K, N) case.
class LinkContext {
public:
    LinkContext(const ExperimentConfig& cfg, SimCase sim_case);

    const ZcBasis& basis() const noexcept { return basis_; }
    const Despreader& despreader() const noexcept { return despreader_; }
    const CodeAssignment& assignment() const noexcept { return assign_; }
    const ChannelSampler& channel() const noexcept { return channel_; }
    const DetectorDesign& design() const noexcept { return design_; }
    int l_taps() const noexcept { return l_taps_; }
    int cp_len() const noexcept { return cp_len_; }
    int n_len() const noexcept { return basis_.n_len(); }
    SimCase sim_case() const noexcept { return case_; }

    // Per-code amplitude for an SNR in dB at the given noise variance. SNR is the
    // per-sample received USR power (unit average channel power, total message
    // power fixed across K) over sigma^2, or over 1 when sigma^2 = 0.
    double amplitude_for_snr(double snr_db, double noise_var) const;

private:
    ZcBasis basis_;
    Despreader despreader_;
    CodeAssignment assign_;
    ChannelSampler channel_;
    DetectorDesign design_;
    int l_taps_;
    int cp_len_;
    SimCase case_;
};

struct TrialOutcome {
    std::vector<double> c_values;  // c_{i,j} in pair order
    double noise_estimate = 0.0;   // estimate_noise_power of the post-CP frame
    double score = 0.0;            // M-th largest c over the reference variance
    bool detected = false;         // score > eta at unit variance
    int bit_errors = 0;
    int bits = 0;
    double channel_energy_in_window = 0.0;  // |h|^2 over the first L taps
    double signed_metric = 0.0;             // mean over i of b_i Re(y_0^H y_i), H1 only
};

// One frame. amplitude = 0 means no USR (H0). The score is normalized by the
// estimated noise power or by noise_var according to mode.
TrialOutcome run_trial(const LinkContext& ctx, double amplitude, double noise_var, ThresholdMode mode, RngStream& rng);

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned jobs = 0);
ExperimentResult run_dist(const ExperimentConfig& cfg, unsigned jobs = 0);
ExperimentResult run_pfa(const ExperimentConfig& cfg, unsigned jobs = 0);
ExperimentResult run_pmd(const ExperimentConfig& cfg, unsigned jobs = 0);
ExperimentResult run_roc(const ExperimentConfig& cfg, unsigned jobs = 0);
ExperimentResult run_ber(const ExperimentConfig& cfg, unsigned jobs = 0);

// experiment,kind,snr_db,k_bits,m_of_n,metric,value,ci_low,ci_high,trials,seed
void write_result_csv(std::ostream& out, const ExperimentResult& result);

// SNR (dB) where a curve sampled on an increasing SNR grid first falls to
// `level`, by log-linear interpolation. nullopt if it never does.
std::optional<double> crossing_snr(std::span<const double> snr_db, std::span<const double> values, double level);

// --- implementation of the template ---

template <class T, class Fn>
std::vector<T> parallel_trials(long count, unsigned jobs, Fn&& fn) {
    std::vector<T> out(static_cast<std::size_t>(count));
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    if (jobs == 1 || count < 2) {
        for (long i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = fn(i);
        return out;
    }
    const long chunk = 256;
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const long begin = next.fetch_add(chunk);
            if (begin >= count) return;
            const long end = std::min(count, begin + chunk);
            try {
                for (long i = begin; i < end; ++i) out[static_cast<std::size_t>(i)] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace cpdsss
