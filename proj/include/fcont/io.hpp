#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcont/factorize.hpp"
#include "fcont/fields.hpp"
#include "fcont/knots.hpp"
#include "fcont/metric.hpp"

namespace fcont {

/// 17 significant digits, enough to round-trip a double.
std::string format_double(double v);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

nlohmann::json space_to_json(const DiscreteMetricSpace& space, const DiscreteMeasure* measure = nullptr);
DiscreteMetricSpace space_from_json(const nlohmann::json& doc);
DiscreteMeasure measure_from_json(const nlohmann::json& doc);

/// Edge list "point_i,point_j,distance" over unordered pairs.
std::string space_to_csv(const DiscreteMetricSpace& space);
DiscreteMetricSpace space_from_csv(const std::string& text);

/// Binary container: "MCEN", u32 version (1), u64 rows, u64 cols, then
/// rows * cols little-endian float64 values, row-major. The sidecar JSON holds
/// the generator tag, parameters, seed and grid axes.
void write_ensemble(const std::filesystem::path& bin_path, const FieldEnsemble& ensemble);
FieldEnsemble read_ensemble(const std::filesystem::path& bin_path);
std::filesystem::path sidecar_path(const std::filesystem::path& bin_path);

/// realization,point,value
std::string ensemble_to_csv(const FieldEnsemble& ensemble);

std::string knots_to_csv(const KnotFunction& f, const std::string& x_name, const std::string& y_name);
std::string tau_samples_to_csv(std::span<const double> tau, std::span<const double> tau0);

struct BoundRow {
    double delta = 0.0;
    double empirical = 0.0;
    double bound = 0.0;
};
std::string bounds_to_csv(std::span<const BoundRow> rows);

nlohmann::json knots_to_json(const KnotFunction& f);
nlohmann::json factorization_to_json(const FactorizationResult& res);

/// JSON numbers for non-finite doubles: strings "inf", "-inf", "nan".
nlohmann::json number(double v);

}  // namespace fcont
