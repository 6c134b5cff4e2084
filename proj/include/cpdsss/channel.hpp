#pragma once

// Multipath fading channels and the additive noise-plus-interference term.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cpdsss/rng.hpp"
#include "cpdsss/types.hpp"

namespace cpdsss {

enum class ChannelKind { TdlA, ExpPdp, Flat };

ChannelKind parse_channel_kind(const std::string& name);
std::string to_string(ChannelKind kind);

struct TapEntry {
    double normalized_delay = 0.0;
    double power_db = 0.0;
};

// Reads a tap table CSV (columns normalized_delay,power_db; '#' lines are comments).
std::vector<TapEntry> load_tap_table(const std::filesystem::path& path);

// Path of the TDL-A table shipped in data/.
std::filesystem::path default_tdl_a_path();

struct ChannelProfile {
    ChannelKind kind = ChannelKind::TdlA;
    double rms_delay_spread = 300e-9;  // seconds
    double sample_rate = 30.72e6;      // Hz
    int max_taps = 128;
    std::vector<TapEntry> tap_table;   // TDL-A only; empty means load default_tdl_a_path()
};

// Average power of each sample-spaced tap. Sums to 1.
std::vector<double> power_delay_profile(const ChannelProfile& profile);

// RMS delay spread of a sample-spaced power delay profile, in samples.
double rms_delay_spread_samples(std::span<const double> pdp);

struct ChannelRealization {
    CVec taps;
    int user_id = 0;
};

// Rayleigh taps with the profile's power delay profile. Throws InvalidArgument on
// a nonpositive sample rate.
ChannelRealization draw_channel(const ChannelProfile& profile, RngStream& rng, int user_id = 0);

// Channel sampler with the power delay profile computed once.
class ChannelSampler {
public:
    explicit ChannelSampler(const ChannelProfile& profile);
    ChannelRealization draw(RngStream& rng, int user_id = 0) const;
    const std::vector<double>& pdp() const noexcept { return pdp_; }

private:
    std::vector<double> pdp_;
};

// Linear convolution of samples with taps, truncated to samples.size().
CVec apply_channel(std::span<const cdouble> samples, const ChannelRealization& h);

// Circular convolution, length x.size().
CVec circular_convolve(std::span<const cdouble> x, std::span<const cdouble> taps);

struct NoiseSpec {
    double variance = 1.0;  // per complex sample; each real dimension gets variance/2
};

// Sum of equal-length signals plus complex Gaussian noise. With no signals the
// length is taken from `length`.
CVec superpose(std::span<const CVec> signals, NoiseSpec noise, RngStream& rng, std::size_t length = 0);

}  // namespace cpdsss
