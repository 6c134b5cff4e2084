#include "cpdsss/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cpdsss/errors.hpp"

namespace cpdsss {

ChannelKind parse_channel_kind(const std::string& name) {
    if (name == "tdl_a" || name == "TDL_A") return ChannelKind::TdlA;
    if (name == "exp_pdp" || name == "EXP_PDP") return ChannelKind::ExpPdp;
    if (name == "flat" || name == "FLAT") return ChannelKind::Flat;
    throw InvalidArgument("unknown channel profile '" + name + "' (expected tdl_a, exp_pdp or flat)");
}

std::string to_string(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::TdlA: return "tdl_a";
        case ChannelKind::ExpPdp: return "exp_pdp";
        case ChannelKind::Flat: return "flat";
    }
    throw InvalidArgument("unknown channel kind");
}

std::filesystem::path default_tdl_a_path() { return std::filesystem::path(CPDSSS_DATA_DIR) / "tdl_a.csv"; }

std::vector<TapEntry> load_tap_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open tap table " + path.string());
    std::vector<TapEntry> taps;
    std::string line;
    bool header_seen = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line.rfind("normalized_delay,power_db", 0) != 0)
                throw InvalidArgument(path.string() + ": expected header 'normalized_delay,power_db'");
            header_seen = true;
            continue;
        }
        std::istringstream ss(line);
        TapEntry t;
        char comma = 0;
        if (!(ss >> t.normalized_delay >> comma >> t.power_db) || comma != ',' || t.normalized_delay < 0.0)
            throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": malformed tap row");
        taps.push_back(t);
    }
    if (taps.empty()) throw InvalidArgument(path.string() + ": no taps");
    return taps;
}

std::vector<double> power_delay_profile(const ChannelProfile& profile) {
    if (!(profile.sample_rate > 0.0)) throw InvalidArgument("channel: sample_rate must be > 0");
    if (profile.max_taps < 1) throw InvalidArgument("channel: max_taps must be >= 1");
    if (profile.rms_delay_spread < 0.0) throw InvalidArgument("channel: rms_delay_spread must be >= 0");

    const double spread_samples = profile.rms_delay_spread * profile.sample_rate;
    std::vector<double> pdp;
    switch (profile.kind) {
        case ChannelKind::Flat:
            pdp = {1.0};
            break;
        case ChannelKind::ExpPdp: {
            pdp.resize(static_cast<std::size_t>(profile.max_taps));
            if (spread_samples <= 0.0) {
                pdp.assign(1, 1.0);
                break;
            }
            for (std::size_t n = 0; n < pdp.size(); ++n) pdp[n] = std::exp(-static_cast<double>(n) / spread_samples);
            break;
        }
        case ChannelKind::TdlA: {
            const auto table = profile.tap_table.empty() ? load_tap_table(default_tdl_a_path()) : profile.tap_table;
            for (const auto& t : table) {
                const auto d = static_cast<std::size_t>(std::lround(t.normalized_delay * spread_samples));
                if (d >= static_cast<std::size_t>(profile.max_taps)) continue;
                if (pdp.size() <= d) pdp.resize(d + 1, 0.0);
                pdp[d] += std::pow(10.0, t.power_db / 10.0);
            }
            if (pdp.empty()) throw InvalidArgument("channel: every TDL tap lies beyond max_taps");
            break;
        }
    }
    const double total = std::accumulate(pdp.begin(), pdp.end(), 0.0);
    for (auto& p : pdp) p /= total;
    return pdp;
}

double rms_delay_spread_samples(std::span<const double> pdp) {
    double p = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t n = 0; n < pdp.size(); ++n) {
        const double d = static_cast<double>(n);
        p += pdp[n];
        m1 += pdp[n] * d;
        m2 += pdp[n] * d * d;
    }
    if (p <= 0.0) return 0.0;
    m1 /= p;
    m2 /= p;
    return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

ChannelSampler::ChannelSampler(const ChannelProfile& profile) : pdp_(power_delay_profile(profile)) {}

ChannelRealization ChannelSampler::draw(RngStream& rng, int user_id) const {
    ChannelRealization h;
    h.user_id = user_id;
    h.taps.resize(pdp_.size());
    for (std::size_t n = 0; n < pdp_.size(); ++n)
        h.taps[n] = pdp_[n] > 0.0 ? rng.complex_normal(pdp_[n]) : cdouble{0.0, 0.0};
    return h;
}

ChannelRealization draw_channel(const ChannelProfile& profile, RngStream& rng, int user_id) {
    return ChannelSampler(profile).draw(rng, user_id);
}

CVec apply_channel(std::span<const cdouble> samples, const ChannelRealization& h) {
    CVec out(samples.size(), cdouble{0.0, 0.0});
    for (std::size_t d = 0; d < h.taps.size(); ++d) {
        const cdouble g = h.taps[d];
        if (g == cdouble{0.0, 0.0}) continue;
        for (std::size_t m = d; m < samples.size(); ++m) out[m] += g * samples[m - d];
    }
    return out;
}

CVec circular_convolve(std::span<const cdouble> x, std::span<const cdouble> taps) {
    const std::size_t n = x.size();
    CVec out(n, cdouble{0.0, 0.0});
    for (std::size_t d = 0; d < taps.size(); ++d)
        for (std::size_t m = 0; m < n; ++m) out[m] += taps[d] * x[(m + n - d % n) % n];
    return out;
}

CVec superpose(std::span<const CVec> signals, NoiseSpec noise, RngStream& rng, std::size_t length) {
    if (noise.variance < 0.0) throw InvalidArgument("superpose: noise variance must be >= 0");
    const std::size_t n = signals.empty() ? length : signals.front().size();
    for (const auto& s : signals)
        if (s.size() != n) throw InvalidArgument("superpose: signal lengths differ");
    CVec y(n, cdouble{0.0, 0.0});
    for (const auto& s : signals)
        for (std::size_t m = 0; m < n; ++m) y[m] += s[m];
    if (noise.variance > 0.0)
        for (auto& v : y) v += rng.complex_normal(noise.variance);
    return y;
}

}  // namespace cpdsss
