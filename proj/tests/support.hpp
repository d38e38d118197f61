#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fcont/fields.hpp"

namespace fcont::testing {

/// Ensemble from explicit rows.
inline FieldEnsemble ensemble_from_rows(const std::vector<std::vector<double>>& rows,
                                        std::vector<std::vector<double>> axes = {}) {
    std::vector<double> values;
    for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
    return FieldEnsemble(rows.size(), rows.front().size(), std::move(values), {"test", {}, 0}, std::move(axes));
}

/// xi(x) = eta * f(x) with eta = +-1 alternating over realizations.
template <class F>
FieldEnsemble sign_times(std::size_t m, const std::vector<double>& grid, F&& f) {
    std::vector<std::vector<double>> rows(m, std::vector<double>(grid.size()));
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t i = 0; i < grid.size(); ++i) rows[r][i] = (r % 2 ? -1.0 : 1.0) * f(grid[i]);
    return ensemble_from_rows(rows);
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

/// Standard error of the sample mean of v.
inline double std_error(const std::vector<double>& v) { return std::sqrt(variance(v) / static_cast<double>(v.size())); }

inline std::vector<double> uniform_samples(std::size_t n, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> out(n);
    for (double& x : out) x = u(eng);
    return out;
}

}  // namespace fcont::testing
