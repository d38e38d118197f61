#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcont/factorize.hpp"
#include "fcont/fields.hpp"
#include "fcont/metric.hpp"
#include "fcont/orlicz.hpp"

namespace fcont {

/// Invalid configuration; `path` names the offending field ("norm.family").
class ConfigError : public InvalidInput {
public:
    ConfigError(std::string path, const std::string& what)
        : InvalidInput(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct GeneratorConfig {
    std::string family = "brownian";  // brownian | fbm | gaussian | stable | brownian_sheet | zero
    std::size_t points = 2049;        // grid size (per axis for the sheet)
    std::size_t dim = 2;              // sheet dimension
    double t_max = 0.36787944117144233;  // 1/e
    std::size_t realizations = 10000;
    std::uint64_t seed = 20240601;
    double hurst = 0.5;               // fbm
    double alpha = 1.2;               // stable
    std::string kernel = "brownian";  // gaussian: brownian | fbm | squared_exponential
    double length_scale = 0.1;        // squared_exponential
};

struct OrliczConfig {
    std::string family = "power";  // power | exp_power | gaussian | table
    double param = 2.0;
    std::vector<Knot> knots;
    std::optional<double> nabla2;
};

struct PsiConfig {
    std::string family = "natural";  // natural | degenerate | constant | power | table
    double param = 2.0;
    double scale = 1.0;
    std::vector<Knot> knots;
};

struct NormConfig {
    std::string kind = "orlicz";  // orlicz | gls
    OrliczConfig orlicz;
    PsiConfig psi;
    std::vector<double> p_grid = default_p_grid();
};

struct PlanConfig {
    double nu = 1.0;
    double theta = 1.0;
    std::size_t N = 40;
    std::vector<double> a, b;  // explicit sequences override the defaults
};

struct DeltaGridConfig {
    std::size_t points = 48;
    std::vector<double> values;  // explicit grid overrides `points`
};

struct PipelineFlags {
    bool factorize = true;
    bool entropy_bound = false;
    bool kr_bound = false;
    bool rectangle = false;
    bool heavy_tail = false;
};

struct EntropyConfig {
    PsiConfig psi{"degenerate", 2.0, 1.0, {}};
    std::vector<double> deltas;  // default: 20 log-spaced points in [2^-10, 2^-2]
    std::size_t max_points = 257;
    std::size_t nodes = 512;
};

struct KrConfig {
    double p = 4.0;
    double theta_reg = 2.0;
    std::size_t max_points = 129;
};

struct HeavyTailConfig {
    double m = 1.0;
    double moment_p = 4.0;
    std::vector<std::size_t> levels{100, 1000, 10000};
};

struct RectangleConfig {
    std::vector<double> direction{1.0, 1.0};
    std::size_t points = 24;  // s grid
};

struct ExperimentConfig {
    GeneratorConfig generator;
    NormConfig norm;
    PlanConfig plan;
    DeltaGridConfig delta_grid;
    PipelineFlags pipelines;
    EntropyConfig entropy;
    KrConfig kr;
    HeavyTailConfig heavy_tail;
    RectangleConfig rectangle;
    std::string output = "out";
    std::optional<std::size_t> threads;
};

/// Strict parse: unknown keys and wrong types raise ConfigError with the
/// field path. Missing keys keep their defaults.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

OrliczFunction make_orlicz(const OrliczConfig& cfg);
/// `natural` needs the ensemble; the others ignore it.
PsiFunction make_psi(const PsiConfig& cfg, const FieldEnsemble* ensemble, const std::vector<double>& p_grid);
NormSpec make_norm(const NormConfig& cfg, const FieldEnsemble* ensemble);
SequencePlan make_plan(const PlanConfig& cfg);

/// Grid coordinates on [0, t_max] for line generators.
std::vector<double> generator_grid(const GeneratorConfig& cfg);
FieldEnsemble generate(const GeneratorConfig& cfg);
bool is_line_family(const std::string& family);

}  // namespace fcont
