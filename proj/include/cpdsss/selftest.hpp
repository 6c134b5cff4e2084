#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cpdsss {

struct SelftestOptions {
    std::string filter;     // substring of the check name; empty runs all
    double noise_var = 1.0;  // fixture variance for the density checks
    std::uint64_t seed = 1;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

std::vector<std::string> selftest_names();
std::vector<CheckResult> run_selftest(const SelftestOptions& opts);

}  // namespace cpdsss
