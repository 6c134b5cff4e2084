#include "cpdsss/sim_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cpdsss/errors.hpp"

namespace cpdsss {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

}  // namespace

namespace {

// Seconds to ns, rounded to 1e-6 ns so that json -> config -> json is a fixed point.
double to_ns(double seconds) { return std::round(seconds * 1e15) / 1e6; }

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    static const std::set<std::string> top = {
        "experiment", "kind", "n_len", "cp_len", "l_taps", "zc_root", "k_bits", "m_of_n", "cases",
        "target_pfa", "snr_grid_db", "num_trials", "seed", "noise_var", "threshold_mode", "ber_mode",
        "roc_pfa_grid", "histogram_bins", "channel"};
    static const std::set<std::string> chan = {"profile", "rms_delay_spread_ns", "sample_rate_hz", "max_taps",
                                               "tdl_table"};
    reject_unknown(j, top, "config");

    ExperimentConfig c;
    c.experiment = get_or<std::string>(j, "experiment", c.experiment, "config");
    if (!j.contains("kind")) throw ConfigError("config: missing required key 'kind'");
    c.kind = parse_experiment_kind(get_or<std::string>(j, "kind", "", "config"));
    c.n_len = get_or(j, "n_len", c.n_len, "config");
    c.cp_len = get_or(j, "cp_len", c.cp_len, "config");
    c.l_taps = get_or(j, "l_taps", c.l_taps, "config");
    c.zc_root = get_or(j, "zc_root", c.zc_root, "config");
    c.target_pfa = get_or(j, "target_pfa", c.target_pfa, "config");
    c.snr_grid_db = get_or(j, "snr_grid_db", c.snr_grid_db, "config");
    c.num_trials = get_or(j, "num_trials", c.num_trials, "config");
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "config");
    c.noise_var = get_or(j, "noise_var", c.noise_var, "config");
    c.threshold_mode = parse_threshold_mode(get_or<std::string>(j, "threshold_mode", to_string(c.threshold_mode), "config"));
    c.ber_mode = parse_ber_mode(get_or<std::string>(j, "ber_mode", to_string(c.ber_mode), "config"));
    c.roc_pfa_grid = get_or(j, "roc_pfa_grid", c.roc_pfa_grid, "config");
    c.histogram_bins = get_or(j, "histogram_bins", c.histogram_bins, "config");

    if (j.contains("cases")) {
        if (j.contains("k_bits") || j.contains("m_of_n"))
            throw ConfigError("config: give either 'cases' or 'k_bits'/'m_of_n', not both");
        const auto& arr = j.at("cases");
        if (!arr.is_array() || arr.empty()) throw ConfigError("config.cases: expected a nonempty array");
        c.cases.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string where = "config.cases[" + std::to_string(i) + "]";
            reject_unknown(arr[i], {"k_bits", "m_of_n"}, where);
            c.cases.push_back({get_or(arr[i], "k_bits", 1, where), get_or(arr[i], "m_of_n", 1, where)});
        }
    } else {
        c.cases = {{get_or(j, "k_bits", 1, "config"), get_or(j, "m_of_n", 1, "config")}};
    }

    if (j.contains("channel")) {
        const auto& ch = j.at("channel");
        reject_unknown(ch, chan, "config.channel");
        try {
            c.channel.kind = parse_channel_kind(get_or<std::string>(ch, "profile", to_string(c.channel.kind), "config.channel"));
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("config.channel.profile: ") + e.what());
        }
        c.channel.rms_delay_spread =
            get_or(ch, "rms_delay_spread_ns", to_ns(c.channel.rms_delay_spread), "config.channel") / 1e9;
        c.channel.sample_rate = get_or(ch, "sample_rate_hz", c.channel.sample_rate, "config.channel");
        c.channel.max_taps = get_or(ch, "max_taps", c.channel.max_taps, "config.channel");
        c.tdl_table = get_or<std::string>(ch, "tdl_table", c.tdl_table, "config.channel");
    }

    // range checks that the library would otherwise report mid-run
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError("config: " + msg);
    };
    require(c.n_len >= 2, "n_len must be >= 2");
    require(c.cp_len >= 0 && c.cp_len < c.n_len, "cp_len must be in [0, n_len)");
    require(c.l_taps >= 1 && c.l_taps < c.n_len, "l_taps must be in [1, n_len)");
    require(c.target_pfa > 0.0 && c.target_pfa < 1.0, "target_pfa must be in (0, 1)");
    require(c.num_trials >= 1, "num_trials must be >= 1");
    require(c.noise_var >= 0.0 && std::isfinite(c.noise_var), "noise_var must be >= 0");
    require(c.histogram_bins >= 1, "histogram_bins must be >= 1");
    require(c.channel.sample_rate > 0.0, "channel.sample_rate_hz must be > 0");
    require(c.channel.max_taps >= 1, "channel.max_taps must be >= 1");
    for (const auto& k : c.cases) {
        require(k.k_bits >= 1, "k_bits must be >= 1 (pairwise detection)");
        require(k.m_of_n >= 1 && k.m_of_n <= k.k_bits * (k.k_bits + 1) / 2, "m_of_n must be in [1, K(K+1)/2]");
        require(static_cast<long>(k.k_bits + 1) * (c.l_taps + 1) <= c.n_len, "K+1 codes do not fit in n_len");
    }
    for (double p : c.roc_pfa_grid) require(p > 0.0 && p < 1.0, "roc_pfa_grid entries must be in (0, 1)");
    if (c.kind != ExperimentKind::Pfa) require(!c.snr_grid_db.empty(), "snr_grid_db must not be empty");
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json cases = json::array();
    for (const auto& k : c.cases) cases.push_back({{"k_bits", k.k_bits}, {"m_of_n", k.m_of_n}});
    return json{
        {"experiment", c.experiment},
        {"kind", to_string(c.kind)},
        {"n_len", c.n_len},
        {"cp_len", c.cp_len},
        {"l_taps", c.l_taps},
        {"zc_root", c.zc_root},
        {"cases", cases},
        {"target_pfa", c.target_pfa},
        {"snr_grid_db", c.snr_grid_db},
        {"num_trials", c.num_trials},
        {"seed", c.seed},
        {"noise_var", c.noise_var},
        {"threshold_mode", to_string(c.threshold_mode)},
        {"ber_mode", to_string(c.ber_mode)},
        {"roc_pfa_grid", c.roc_pfa_grid},
        {"histogram_bins", c.histogram_bins},
        {"channel",
         {{"profile", to_string(c.channel.kind)},
          {"rms_delay_spread_ns", to_ns(c.channel.rms_delay_spread)},
          {"sample_rate_hz", c.channel.sample_rate},
          {"max_taps", c.channel.max_taps},
          {"tdl_table", c.tdl_table}}},
    };
}

json parse_config_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line/column
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
}

json read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "': expected key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &j;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("override '" + assignment + "': empty path component");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (!node->is_object()) {
            if (!node->is_null()) throw ConfigError("override '" + assignment + "': '" + part + "' is not an object");
            *node = json::object();
        }
        start = dot + 1;
    }
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string canon = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace cpdsss
