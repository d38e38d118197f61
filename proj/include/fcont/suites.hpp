#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcont/config.hpp"

namespace fcont {

enum class CheckStatus { pass, fail, skipped };
const char* to_string(CheckStatus s);

struct CheckResult {
    int criterion = 0;
    std::string name;
    CheckStatus status = CheckStatus::skipped;
    std::string detail;
    nlohmann::json data = nlohmann::json::object();
};

/// Problem sizes for the named suites. `reduced()` shrinks them for smoke runs.
struct SuiteSizes {
    std::size_t factorization_points = 2049, factorization_m = 10000;
    std::size_t tails_points = 129, tails_m = 100000;
    std::size_t entropy_points = 257, entropy_m = 2000;
    std::size_t kr_points = 129, kr_m = 10000;
    std::size_t vfun_points = 33, vfun_m = 10000;
    std::size_t heavy_points = 257;
    std::vector<std::size_t> heavy_levels{100, 1000, 10000};

    static SuiteSizes reduced();
};

/// "factorization", "wiener-tails", "entropy", "kr", "v-functional",
/// "rectangle", "heavy-tail", "transforms", or "all".
const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);

/// Runs the suite's checks with the config's generator family, seed and
/// family parameters; suites whose generator does not match report SKIPPED.
std::vector<CheckResult> run_suite(const std::string& name, const ExperimentConfig& cfg,
                                   const SuiteSizes& sizes = {});

}  // namespace fcont
