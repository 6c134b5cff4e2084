#pragma once

// JSON experiment configuration. Unknown keys are rejected at every level.
//
//   {
//     "experiment": "fig3", "kind": "pfa",
//     "n_len": 1024, "cp_len": 72, "l_taps": 40, "zc_root": 1,
//     "k_bits": 1, "m_of_n": 1,               // or "cases": [{"k_bits": 1, "m_of_n": 1}, ...]
//     "target_pfa": 0.001, "snr_grid_db": [-12], "num_trials": 200000,
//     "seed": 1, "noise_var": 1.0,
//     "threshold_mode": "analytic_est_sigma", "ber_mode": "genie",
//     "roc_pfa_grid": [...], "histogram_bins": 50,
//     "channel": {"profile": "tdl_a", "rms_delay_spread_ns": 300,
//                 "sample_rate_hz": 30720000, "max_taps": 128, "tdl_table": ""}
//   }

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cpdsss/sim.hpp"

namespace cpdsss {

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Parses text; syntax errors become ConfigError with line and column.
nlohmann::json parse_config_text(const std::string& text, const std::string& origin = "<config>");
nlohmann::json read_config_file(const std::filesystem::path& path);

// Applies "a.b.c=value". The value is read as JSON when it parses, else as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

// FNV-1a 64 over the canonical resolved config, hex encoded.
std::string config_hash(const ExperimentConfig& cfg);

// Writes via a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace cpdsss
