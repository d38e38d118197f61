#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcont/config.hpp"
#include "fcont/suites.hpp"

namespace fcont {

struct Assertion {
    std::string name;
    CheckStatus status = CheckStatus::skipped;
    std::string reason;
};

struct RunReport {
    nlohmann::json doc;  // written as report.json
    std::vector<Assertion> assertions;

    /// Every assertion passed or was skipped.
    bool ok() const;
};

/// Generates the configured ensemble, runs the selected pipelines and writes
/// report.json, g_knots.csv, tau_samples.csv and bounds.csv under out_dir.
RunReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Runs a named suite and writes report.json under out_dir.
RunReport verify_suite(const ExperimentConfig& cfg, const std::string& suite, const std::filesystem::path& out_dir,
                       const SuiteSizes& sizes = {});

/// Writes ensemble.bin and ensemble.meta.json.
void simulate_to(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Writes ensemble.csv, space.json and space.csv for an ensemble file (or,
/// when `ensemble_bin` is empty, for a freshly generated ensemble). Tensor
/// grids get Euclidean distances; the space files are skipped above 1024
/// grid points.
void export_to(const ExperimentConfig& cfg, const std::filesystem::path& ensemble_bin,
               const std::filesystem::path& out_dir);

}  // namespace fcont
