#include "cpdsss/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "cpdsss/errors.hpp"
#include "cpdsss/sim_config.hpp"

namespace cpdsss {

const char* const kCodeVersion = "cpdsss 1.0.0";

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Dist: return "dist";
        case ExperimentKind::Pfa: return "pfa";
        case ExperimentKind::Pmd: return "pmd";
        case ExperimentKind::Roc: return "roc";
        case ExperimentKind::Ber: return "ber";
    }
    return "?";
}

std::string to_string(ThresholdMode m) {
    return m == ThresholdMode::AnalyticTrueSigma ? "analytic_true_sigma" : "analytic_est_sigma";
}

std::string to_string(BerMode m) { return m == BerMode::Genie ? "genie" : "detected"; }

ExperimentKind parse_experiment_kind(const std::string& s) {
    for (auto k : {ExperimentKind::Dist, ExperimentKind::Pfa, ExperimentKind::Pmd, ExperimentKind::Roc,
                   ExperimentKind::Ber})
        if (s == to_string(k)) return k;
    throw ConfigError("unknown experiment kind '" + s + "' (expected dist, pfa, pmd, roc or ber)");
}

ThresholdMode parse_threshold_mode(const std::string& s) {
    if (s == "analytic_true_sigma") return ThresholdMode::AnalyticTrueSigma;
    if (s == "analytic_est_sigma") return ThresholdMode::AnalyticEstSigma;
    throw ConfigError("unknown threshold_mode '" + s + "' (expected analytic_true_sigma or analytic_est_sigma)");
}

BerMode parse_ber_mode(const std::string& s) {
    if (s == "genie") return BerMode::Genie;
    if (s == "detected") return BerMode::Detected;
    throw ConfigError("unknown ber_mode '" + s + "' (expected genie or detected)");
}

const ResultRow* ExperimentResult::find(const std::string& metric, std::optional<double> snr_db,
                                        std::optional<int> k_bits, std::optional<int> m_of_n) const {
    for (const auto& r : rows) {
        if (r.metric != metric) continue;
        if (snr_db && (!r.snr_db || std::abs(*r.snr_db - *snr_db) > 1e-9)) continue;
        if (k_bits && r.k_bits != *k_bits) continue;
        if (m_of_n && r.m_of_n != *m_of_n) continue;
        return &r;
    }
    return nullptr;
}

Interval wilson_interval(long successes, long trials, double z) {
    if (trials <= 0) return {0.0, 1.0};
    if (successes < 0 || successes > trials) throw InvalidArgument("wilson_interval: successes must be in [0, trials]");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InvalidArgument("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw InvalidArgument("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

namespace {
// sqrt(-ln(0.005) / 2)
constexpr double kKsC1pct = 1.6276236115189504;
}  // namespace

double ks_critical_1pct(std::size_t n) { return kKsC1pct / std::sqrt(static_cast<double>(n)); }

double ks_critical_1pct(std::size_t n, std::size_t m) {
    const double a = static_cast<double>(n), b = static_cast<double>(m);
    return kKsC1pct * std::sqrt((a + b) / (a * b));
}

std::vector<RocPoint> empirical_roc(std::span<const double> h0_scores, std::span<const double> h1_scores,
                                    std::span<const double> thresholds) {
    auto above = [](std::span<const double> s, double t) {
        if (s.empty()) return 0.0;
        const auto n = std::count_if(s.begin(), s.end(), [t](double v) { return v > t; });
        return static_cast<double>(n) / static_cast<double>(s.size());
    };
    std::vector<RocPoint> out;
    out.reserve(thresholds.size());
    for (double t : thresholds) out.push_back({t, above(h0_scores, t), above(h1_scores, t)});
    return out;
}

namespace {

ChannelProfile resolved_profile(const ExperimentConfig& cfg) {
    ChannelProfile p = cfg.channel;
    if (p.kind == ChannelKind::TdlA && p.tap_table.empty() && !cfg.tdl_table.empty())
        p.tap_table = load_tap_table(cfg.tdl_table);
    return p;
}

}  // namespace

LinkContext::LinkContext(const ExperimentConfig& cfg, SimCase sim_case)
    : basis_(generate_zc(cfg.n_len, cfg.zc_root)),
      despreader_(basis_),
      assign_(allocate_codes(1, sim_case.k_bits, cfg.l_taps, cfg.n_len).front()),
      channel_(resolved_profile(cfg)),
      design_(design_detector(cfg.target_pfa, sim_case.k_bits, sim_case.m_of_n, cfg.l_taps, 1.0)),
      l_taps_(cfg.l_taps),
      cp_len_(cfg.cp_len),
      case_(sim_case) {}

double LinkContext::amplitude_for_snr(double snr_db, double noise_var) const {
    // with the noise switched off, SNR is quoted against unit variance
    const double ref = noise_var > 0.0 ? noise_var : 1.0;
    const double total_power = std::pow(10.0, snr_db / 10.0) * n_len() * ref;
    return code_amplitude(total_power, case_.k_bits);
}

TrialOutcome run_trial(const LinkContext& ctx, double amplitude, double noise_var, ThresholdMode mode,
                       RngStream& rng) {
    const int n = ctx.n_len();
    const int cp = ctx.cp_len();
    const int k = ctx.sim_case().k_bits;
    TrialOutcome out;

    std::vector<int> bits;
    std::vector<CVec> signals;
    if (amplitude > 0.0) {
        bits.assign(static_cast<std::size_t>(k) + 1, 1);
        for (int i = 1; i <= k; ++i) bits[static_cast<std::size_t>(i)] = rng.sign();
        const auto body = build_message(ctx.basis(), ctx.assignment(), bits, amplitude);
        const auto h = ctx.channel().draw(rng);
        for (std::size_t d = 0; d < h.taps.size() && d < static_cast<std::size_t>(ctx.l_taps()); ++d)
            out.channel_energy_in_window += std::norm(h.taps[d]);
        signals.push_back(apply_channel(add_cp(body, cp), h));
    }
    const auto received = superpose(signals, NoiseSpec{noise_var}, rng, static_cast<std::size_t>(n + cp));
    const auto y = remove_cp(received, cp);
    out.noise_estimate = estimate_noise_power(y);

    const auto yprime = ctx.despreader().despread(y);
    const auto ds = extract_user(yprime, ctx.assignment(), ctx.l_taps());
    auto stats = decision_stats(ds);

    const double ref_var = mode == ThresholdMode::AnalyticEstSigma ? out.noise_estimate : noise_var;
    const int m = ctx.sim_case().m_of_n;
    auto sorted = stats.c_values;
    std::nth_element(sorted.begin(), sorted.begin() + (m - 1), sorted.end(), std::greater<>());
    const double cm = sorted[static_cast<std::size_t>(m - 1)];
    if (ref_var > 0.0)
        out.score = cm / ref_var;
    else
        out.score = cm > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;

    const double eta = ref_var > 0.0 ? ctx.design().eta_for(ref_var) : 0.0;
    out.detected = detect(stats, m, eta).detected;

    if (!bits.empty()) {
        const auto rec = recover_bits(ds);
        double signed_sum = 0.0;
        for (int i = 0; i < k; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            if (rec.hard_bits[ui] != bits[ui + 1]) ++out.bit_errors;
            signed_sum += bits[ui + 1] * rec.soft_metrics[ui];
        }
        out.bits = k;
        out.signed_metric = signed_sum / k;
    }
    out.c_values = std::move(stats.c_values);
    return out;
}

namespace {

constexpr std::uint64_t kH0 = 0;
constexpr std::uint64_t kH1 = 1;

ResultRow make_row(const ExperimentConfig& cfg, const SimCase& c, std::optional<double> snr, std::string metric,
                   double value, Interval ci, long trials) {
    ResultRow r;
    r.experiment = cfg.experiment;
    r.kind = to_string(cfg.kind);
    r.snr_db = snr;
    r.k_bits = c.k_bits;
    r.m_of_n = c.m_of_n;
    r.metric = std::move(metric);
    r.value = value;
    r.ci_low = ci.low;
    r.ci_high = ci.high;
    r.trials = trials;
    r.seed = cfg.seed;
    return r;
}

ResultRow point_row(const ExperimentConfig& cfg, const SimCase& c, std::optional<double> snr, std::string metric,
                    double value, long trials = 0) {
    return make_row(cfg, c, snr, std::move(metric), value, {value, value}, trials);
}

ResultRow rate_row(const ExperimentConfig& cfg, const SimCase& c, std::optional<double> snr, std::string metric,
                   long hits, long trials) {
    const double v = trials > 0 ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0;
    return make_row(cfg, c, snr, std::move(metric), v, wilson_interval(hits, trials), trials);
}

std::string format_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

ExperimentResult with_provenance(const ExperimentConfig& cfg, std::vector<ResultRow> rows) {
    ExperimentResult r;
    r.rows = std::move(rows);
    r.provenance = {config_hash(cfg), cfg.seed, kCodeVersion};
    return r;
}

void check_kind(const ExperimentConfig& cfg, ExperimentKind k) {
    if (cfg.kind != k)
        throw ConfigError("experiment kind is '" + to_string(cfg.kind) + "', expected '" + to_string(k) + "'");
}

// Trials for one (case, point, hypothesis) with their own stream family.
template <class T, class Project>
std::vector<T> trials_for(const ExperimentConfig& cfg, const LinkContext& ctx, std::size_t case_idx,
                          std::size_t point_idx, std::uint64_t hyp, double amplitude, unsigned jobs,
                          Project&& project) {
    return parallel_trials<T>(cfg.num_trials, jobs, [&](long t) {
        RngStream rng(cfg.seed, {case_idx, point_idx, hyp, static_cast<std::uint64_t>(t)});
        return project(run_trial(ctx, amplitude, cfg.noise_var, cfg.threshold_mode, rng));
    });
}

}  // namespace

ExperimentResult run_pfa(const ExperimentConfig& cfg, unsigned jobs) {
    check_kind(cfg, ExperimentKind::Pfa);
    std::vector<ResultRow> rows;
    for (std::size_t ci = 0; ci < cfg.cases.size(); ++ci) {
        const auto& c = cfg.cases[ci];
        const LinkContext ctx(cfg, c);
        const auto hits = trials_for<char>(cfg, ctx, ci, 0, kH0, 0.0, jobs,
                                           [](const TrialOutcome& o) { return static_cast<char>(o.detected); });
        const long count = std::accumulate(hits.begin(), hits.end(), 0L);
        rows.push_back(rate_row(cfg, c, std::nullopt, "pfa", count, cfg.num_trials));
        rows.push_back(point_row(cfg, c, std::nullopt, "target_pfa", cfg.target_pfa));
        rows.push_back(point_row(cfg, c, std::nullopt, "p0", ctx.design().p0));
        rows.push_back(point_row(cfg, c, std::nullopt, "eta_unit_sigma2", ctx.design().eta));
    }
    return with_provenance(cfg, std::move(rows));
}

ExperimentResult run_pmd(const ExperimentConfig& cfg, unsigned jobs) {
    check_kind(cfg, ExperimentKind::Pmd);
    std::vector<ResultRow> rows;
    for (std::size_t ci = 0; ci < cfg.cases.size(); ++ci) {
        const auto& c = cfg.cases[ci];
        const LinkContext ctx(cfg, c);
        for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
            const double snr = cfg.snr_grid_db[si];
            const auto det = trials_for<char>(cfg, ctx, ci, si, kH1, ctx.amplitude_for_snr(snr, cfg.noise_var), jobs,
                                              [](const TrialOutcome& o) { return static_cast<char>(o.detected); });
            const long detected = std::accumulate(det.begin(), det.end(), 0L);
            rows.push_back(rate_row(cfg, c, snr, "pmd", cfg.num_trials - detected, cfg.num_trials));
        }
    }
    return with_provenance(cfg, std::move(rows));
}

ExperimentResult run_roc(const ExperimentConfig& cfg, unsigned jobs) {
    check_kind(cfg, ExperimentKind::Roc);
    std::vector<ResultRow> rows;
    auto score_of = [](const TrialOutcome& o) { return o.score; };
    for (std::size_t ci = 0; ci < cfg.cases.size(); ++ci) {
        const auto& c = cfg.cases[ci];
        const LinkContext ctx(cfg, c);
        std::vector<double> thresholds;
        for (double pfa : cfg.roc_pfa_grid)
            thresholds.push_back(design_detector(pfa, c.k_bits, c.m_of_n, cfg.l_taps, 1.0).eta);

        const auto h0 = trials_for<double>(cfg, ctx, ci, 0, kH0, 0.0, jobs, score_of);
        const auto h0_roc = empirical_roc(h0, {}, thresholds);
        for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
            const auto hits = std::llround(h0_roc[ti].pfa * static_cast<double>(h0.size()));
            rows.push_back(rate_row(cfg, c, std::nullopt, "pfa@" + format_g(cfg.roc_pfa_grid[ti]), hits, cfg.num_trials));
        }
        for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
            const double snr = cfg.snr_grid_db[si];
            const auto h1 = trials_for<double>(cfg, ctx, ci, si, kH1, ctx.amplitude_for_snr(snr, cfg.noise_var), jobs,
                                               score_of);
            const auto roc = empirical_roc({}, h1, thresholds);
            for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
                const auto hits = std::llround(roc[ti].pd * static_cast<double>(h1.size()));
                rows.push_back(rate_row(cfg, c, snr, "pd@" + format_g(cfg.roc_pfa_grid[ti]), hits, cfg.num_trials));
            }
        }
    }
    return with_provenance(cfg, std::move(rows));
}

ExperimentResult run_ber(const ExperimentConfig& cfg, unsigned jobs) {
    check_kind(cfg, ExperimentKind::Ber);
    struct BerTrial {
        int errors = 0;
        int bits = 0;
        bool detected = false;
    };
    std::vector<ResultRow> rows;
    for (std::size_t ci = 0; ci < cfg.cases.size(); ++ci) {
        const auto& c = cfg.cases[ci];
        const LinkContext ctx(cfg, c);
        for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
            const double snr = cfg.snr_grid_db[si];
            const auto res = trials_for<BerTrial>(cfg, ctx, ci, si, kH1, ctx.amplitude_for_snr(snr, cfg.noise_var),
                                                  jobs, [](const TrialOutcome& o) {
                                                      return BerTrial{o.bit_errors, o.bits, o.detected};
                                                  });
            long errors = 0, bits = 0, detected = 0;
            for (const auto& t : res) {
                detected += t.detected ? 1 : 0;
                if (cfg.ber_mode == BerMode::Detected && !t.detected) continue;
                errors += t.errors;
                bits += t.bits;
            }
            rows.push_back(rate_row(cfg, c, snr, "ber", errors, bits));
            rows.push_back(rate_row(cfg, c, snr, "pd", detected, cfg.num_trials));
        }
    }
    return with_provenance(cfg, std::move(rows));
}

ExperimentResult run_dist(const ExperimentConfig& cfg, unsigned jobs) {
    check_kind(cfg, ExperimentKind::Dist);
    std::vector<ResultRow> rows;
    auto values_of = [](const TrialOutcome& o) { return o.c_values; };
    // signed metric last so one pass serves both
    auto values_and_signed = [](const TrialOutcome& o) {
        auto v = o.c_values;
        v.push_back(o.signed_metric);
        return v;
    };
    auto flatten = [](const std::vector<std::vector<double>>& v) {
        std::vector<double> out;
        for (const auto& x : v) out.insert(out.end(), x.begin(), x.end());
        return out;
    };
    auto mean = [](const std::vector<double>& v) {
        return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    for (std::size_t ci = 0; ci < cfg.cases.size(); ++ci) {
        const auto& c = cfg.cases[ci];
        const LinkContext ctx(cfg, c);
        const H0Pdf model(cfg.l_taps, cfg.noise_var > 0.0 ? cfg.noise_var : 1.0);
        double window_power = 0.0;
        const auto& pdp = ctx.channel().pdp();
        for (std::size_t d = 0; d < pdp.size() && d < static_cast<std::size_t>(cfg.l_taps); ++d) window_power += pdp[d];

        const auto h0 = flatten(trials_for<std::vector<double>>(cfg, ctx, ci, 0, kH0, 0.0, jobs, values_of));
        const double h0_mean = mean(h0);
        const long n0 = static_cast<long>(h0.size());
        rows.push_back(point_row(cfg, c, std::nullopt, "h0_mean", h0_mean, n0));
        if (cfg.noise_var > 0.0)
            rows.push_back(point_row(cfg, c, std::nullopt, "ks_h0_analytic",
                                     ks_distance(h0, [&](double x) { return model.cdf(x); }), n0));

        for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
            const double snr = cfg.snr_grid_db[si];
            const double amp = ctx.amplitude_for_snr(snr, cfg.noise_var);
            auto per_trial = trials_for<std::vector<double>>(cfg, ctx, ci, si, kH1, amp, jobs, values_and_signed);
            std::vector<double> signed_vals;
            signed_vals.reserve(per_trial.size());
            for (auto& v : per_trial) {
                signed_vals.push_back(v.back());
                v.pop_back();
            }
            const auto h1 = flatten(per_trial);
            const long n1 = static_cast<long>(h1.size());
            const double h1_mean = mean(h1);
            rows.push_back(point_row(cfg, c, snr, "h1_mean", h1_mean, n1));
            rows.push_back(point_row(cfg, c, snr, "h1_minus_h0_mean", h1_mean - h0_mean, n1));
            rows.push_back(point_row(cfg, c, snr, "expected_offset", amp * amp * window_power));
            // b_i Re(y_0^H y_i) has mean a^2 E|h_window|^2, exactly when the channel fits in the
            // cyclic prefix; 95% CI from the sample deviation
            const double sm = mean(signed_vals);
            double ss = 0.0;
            for (double v : signed_vals) ss += (v - sm) * (v - sm);
            const auto ns = static_cast<double>(signed_vals.size());
            const double half = ns > 1 ? 1.959963984540054 * std::sqrt(ss / (ns - 1) / ns) : 0.0;
            rows.push_back(make_row(cfg, c, snr, "h1_signed_mean", sm, {sm - half, sm + half},
                                    static_cast<long>(signed_vals.size())));
            rows.push_back(point_row(cfg, c, snr, "ks_h0_h1", ks_distance(h0, h1), n1));

            const double top = std::max(*std::max_element(h0.begin(), h0.end()), *std::max_element(h1.begin(), h1.end()));
            const int bins = std::max(1, cfg.histogram_bins);
            const double width = top > 0.0 ? top / bins : 1.0;
            std::vector<long> c0(static_cast<std::size_t>(bins)), c1(static_cast<std::size_t>(bins));
            auto fill = [&](const std::vector<double>& v, std::vector<long>& counts) {
                for (double x : v)
                    ++counts[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(x / width)))];
            };
            fill(h0, c0);
            fill(h1, c1);
            for (int b = 0; b < bins; ++b) {
                const std::string at = "@" + format_g((b + 0.5) * width);
                rows.push_back(point_row(cfg, c, snr, "h0_density" + at,
                                         static_cast<double>(c0[static_cast<std::size_t>(b)]) / (static_cast<double>(n0) * width), n0));
                rows.push_back(point_row(cfg, c, snr, "h1_density" + at,
                                         static_cast<double>(c1[static_cast<std::size_t>(b)]) / (static_cast<double>(n1) * width), n1));
            }
        }
    }
    return with_provenance(cfg, std::move(rows));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned jobs) {
    switch (cfg.kind) {
        case ExperimentKind::Dist: return run_dist(cfg, jobs);
        case ExperimentKind::Pfa: return run_pfa(cfg, jobs);
        case ExperimentKind::Pmd: return run_pmd(cfg, jobs);
        case ExperimentKind::Roc: return run_roc(cfg, jobs);
        case ExperimentKind::Ber: return run_ber(cfg, jobs);
    }
    throw ConfigError("unknown experiment kind");
}

void write_result_csv(std::ostream& out, const ExperimentResult& result) {
    out << "experiment,kind,snr_db,k_bits,m_of_n,metric,value,ci_low,ci_high,trials,seed\n";
    char buf[512];
    for (const auto& r : result.rows) {
        std::string snr = r.snr_db ? format_g(*r.snr_db) : "";
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%d,%d,%s,%.10g,%.10g,%.10g,%ld,%llu\n", r.experiment.c_str(),
                      r.kind.c_str(), snr.c_str(), r.k_bits, r.m_of_n, r.metric.c_str(), r.value, r.ci_low, r.ci_high,
                      r.trials, static_cast<unsigned long long>(r.seed));
        out << buf;
    }
}

std::optional<double> crossing_snr(std::span<const double> snr_db, std::span<const double> values, double level) {
    if (snr_db.size() != values.size()) throw InvalidArgument("crossing_snr: length mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > level) continue;
        if (i == 0) return snr_db[0];
        const double v0 = values[i - 1], v1 = values[i];
        double frac;
        if (v1 > 0.0 && v0 > 0.0)
            frac = (std::log(v0) - std::log(level)) / (std::log(v0) - std::log(v1));
        else
            frac = (v0 - level) / (v0 - v1);
        return snr_db[i - 1] + frac * (snr_db[i] - snr_db[i - 1]);
    }
    return std::nullopt;
}

}  // namespace cpdsss
