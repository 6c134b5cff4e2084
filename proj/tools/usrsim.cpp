// usrsim: threshold design, Monte Carlo experiments and numerical self checks.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cpdsss/analysis.hpp"
#include "cpdsss/errors.hpp"
#include "cpdsss/selftest.hpp"
#include "cpdsss/sim.hpp"
#include "cpdsss/sim_config.hpp"

namespace fs = std::filesystem;
using namespace cpdsss;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCheck = 4;

struct DesignArgs {
    int l_taps = 40;
    double sigma2 = 1.0;
    std::vector<int> k_bits{1};
    std::vector<int> m_of_n{1};
    double pfa = 1e-3;
    std::string out;
};

struct SimArgs {
    std::string config;
    std::string kind;
    std::string out = "results";
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned jobs = 0;
};

struct SelftestArgs {
    std::string filter;
    std::vector<std::string> sets;
};

int cmd_design(const DesignArgs& a) {
    if (!(a.pfa > 0.0 && a.pfa < 1.0)) throw InvalidArgument("--pfa must be in (0, 1)");
    if (!(a.sigma2 > 0.0)) throw InvalidArgument("--sigma2 must be positive");
    std::vector<DetectorDesign> rows;
    for (int k : a.k_bits)
        for (int m : a.m_of_n) rows.push_back(design_detector(a.pfa, k, m, a.l_taps, a.sigma2));
    std::ostringstream csv;
    write_threshold_csv(csv, rows);
    if (a.out.empty()) {
        std::cout << csv.str();
    } else {
        const fs::path p(a.out);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        write_file_atomic(p, csv.str());
    }
    return kExitOk;
}

nlohmann::json sidecar(const ExperimentConfig& cfg, const std::string& status, std::size_t rows) {
    nlohmann::json j;
    j["config"] = config_to_json(cfg);
    j["config_hash"] = config_hash(cfg);
    j["seed"] = cfg.seed;
    j["code_version"] = kCodeVersion;
    j["status"] = status;
    if (status == "complete") j["rows"] = rows;
    return j;
}

int cmd_simulate(const SimArgs& a) {
    nlohmann::json j = a.config.empty() ? nlohmann::json::object() : read_config_file(a.config);
    // a sidecar from an earlier run can be fed back unchanged
    if (j.is_object() && j.contains("config") && j.contains("config_hash")) j = nlohmann::json(j["config"]);
    if (!a.kind.empty()) j["kind"] = a.kind;
    if (a.seed_given) j["seed"] = a.seed;
    for (const auto& s : a.sets) apply_override(j, s);
    const ExperimentConfig cfg = config_from_json(j);

    const fs::path dir(a.out);
    fs::create_directories(dir);
    const std::string stem = cfg.experiment.empty() ? to_string(cfg.kind) : cfg.experiment;
    const fs::path csv_path = dir / (stem + ".csv");
    const fs::path meta_path = dir / (stem + ".json");

    write_file_atomic(meta_path, sidecar(cfg, "running", 0).dump(2) + "\n");
    const ExperimentResult res = run_experiment(cfg, a.jobs);
    std::ostringstream csv;
    write_result_csv(csv, res);
    write_file_atomic(csv_path, csv.str());
    write_file_atomic(meta_path, sidecar(cfg, "complete", res.rows.size()).dump(2) + "\n");
    std::cerr << "wrote " << csv_path.string() << " (" << res.rows.size() << " rows)\n";
    return kExitOk;
}

int cmd_selftest(const SelftestArgs& a) {
    nlohmann::json j = {{"selftest", {{"noise_var", 1.0}, {"seed", 1}}}};
    for (const auto& s : a.sets) apply_override(j, s);
    for (const auto& [key, _] : j.items())
        if (key != "selftest") throw ConfigError("selftest: unknown key '" + key + "'");
    SelftestOptions opts;
    opts.filter = a.filter;
    for (const auto& [key, v] : j["selftest"].items()) {
        if (key == "noise_var" && v.is_number())
            opts.noise_var = v.get<double>();
        else if (key == "seed" && v.is_number_integer() && v.get<long long>() >= 0)
            opts.seed = v.get<std::uint64_t>();
        else
            throw ConfigError("selftest: bad key or value 'selftest." + key + "'");
    }

    const auto results = run_selftest(opts);
    if (results.empty()) throw ConfigError("selftest: no check matches filter '" + a.filter + "'");
    nlohmann::json summary;
    summary["checks"] = nlohmann::json::array();
    int failed = 0;
    for (const auto& r : results) {
        summary["checks"].push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
        if (!r.passed) {
            ++failed;
            std::cerr << "FAIL " << r.name << ": " << r.detail << "\n";
        }
    }
    summary["passed"] = static_cast<int>(results.size()) - failed;
    summary["failed"] = failed;
    std::cout << summary.dump(2) << "\n";
    return failed == 0 ? kExitOk : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CP-DSSS unsourced random access simulator"};
    app.require_subcommand(1);

    DesignArgs design;
    auto* d = app.add_subcommand("design-threshold", "Analytic detector thresholds as CSV");
    d->add_option("-L,--l-taps", design.l_taps, "Despread window length")->check(CLI::PositiveNumber);
    d->add_option("--sigma2", design.sigma2, "Noise variance");
    d->add_option("-K,--k-bits", design.k_bits, "Bits per message (repeatable)")->delimiter(',');
    d->add_option("-M,--m-of-n", design.m_of_n, "Required exceedances (repeatable)")->delimiter(',');
    d->add_option("--pfa", design.pfa, "Target false alarm probability");
    d->add_option("-o,--out", design.out, "Output CSV path (stdout when omitted)");

    SimArgs sim;
    auto* s = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
    s->add_option("-c,--config", sim.config, "JSON experiment config");
    s->add_option("--kind", sim.kind, "dist | pfa | pmd | roc | ber");
    s->add_option("-o,--out", sim.out, "Output directory");
    auto* seed_opt = s->add_option("--seed", sim.seed, "Master seed");
    s->add_option("-j,--jobs", sim.jobs, "Worker threads, 0 = all cores");
    s->add_option("--set", sim.sets, "Override, key.path=value (repeatable)");

    SelftestArgs st;
    auto* t = app.add_subcommand("selftest", "Numerical self checks");
    t->add_option("--filter", st.filter, "Run checks whose name contains this");
    t->add_option("--set", st.sets, "Fixture override, e.g. selftest.noise_var=2");
    t->add_flag_callback("--list", [] {
        for (const auto& n : selftest_names()) std::cout << n << "\n";
        std::exit(kExitOk);
    }, "List check names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }
    sim.seed_given = seed_opt->count() > 0;

    try {
        if (d->parsed()) return cmd_design(design);
        if (s->parsed()) return cmd_simulate(sim);
        if (t->parsed()) return cmd_selftest(st);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const UnsupportedConfig& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const DomainError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
