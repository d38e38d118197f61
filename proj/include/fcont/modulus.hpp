#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fcont/error.hpp"
#include "fcont/knots.hpp"
#include "fcont/metric.hpp"
#include "fcont/orlicz.hpp"

namespace fcont {

class FieldEnsemble;

/// Monotone knot function delta -> value; used per path (Delta) and in norm
/// (theta).
using EmpiricalModulus = KnotFunction;

/// Evaluates Delta(f, delta) = sup_{d(x,y) <= delta} |f(x) - f(y)| for many
/// paths on one space.
///
/// General spaces: point pairs are sorted by distance once, and each path is
/// a single cumulative sweep over the pairs. Line spaces: the admissible
/// pairs at radius delta are the windows x_j - x_i <= delta, so Delta is the
/// largest window range, answered from a per-path sparse table.
class ModulusEvaluator {
public:
    explicit ModulusEvaluator(const DiscreteMetricSpace& space);

    /// Writes Delta(f, deltas[k]) into out[k]. deltas may be in any order.
    void evaluate(std::span<const double> f, std::span<const double> deltas, std::span<double> out) const;
    std::vector<double> evaluate(std::span<const double> f, std::span<const double> deltas) const;

    std::size_t points() const { return n_; }

private:
    struct Pair {
        std::uint32_t i, j;
        double d;
    };

    void evaluate_line(std::span<const double> f, std::span<const double> deltas, std::span<double> out) const;
    void evaluate_pairs(std::span<const double> f, std::span<const double> deltas, std::span<double> out) const;

    std::size_t n_ = 0;
    bool line_ = false;
    std::vector<double> x_;
    std::vector<Pair> pairs_;
};

/// Per-path moduli on a delta grid: values[r * deltas.size() + k].
struct ModulusSamples {
    std::vector<double> deltas;
    std::size_t realizations = 0;
    std::vector<double> values;

    std::span<const double> path(std::size_t r) const { return {values.data() + r * deltas.size(), deltas.size()}; }
    std::vector<double> at(std::size_t k) const;
};

/// Increasing, non-negative delta grid within [0, diam] (tolerance 1e-12).
void validate_delta_grid(std::span<const double> deltas, double diameter);

/// Log-spaced grid from the smallest positive distance to the diameter,
/// preceded by 0.
std::vector<double> default_delta_grid(const DiscreteMetricSpace& space, std::size_t points = 48);

EmpiricalModulus path_modulus(std::span<const double> values, const DiscreteMetricSpace& space,
                              std::span<const double> delta_grid);

ModulusSamples modulus_samples(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space,
                               std::span<const double> delta_grid);

/// theta(delta) = || Delta(xi, delta) || across realizations.
EmpiricalModulus theta_function(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space,
                                std::span<const double> delta_grid, const NormSpec& norm);
EmpiricalModulus theta_from_samples(const ModulusSamples& samples, const NormSpec& norm);

// ---------------------------------------------------------------- rectangles

constexpr std::size_t kMaxRectangleDim = 3;

/// Alternating sum of f over the 2^d corners of the box spanned by x and y:
/// corners taking k coordinates from x carry sign (-1)^k.
template <class F>
double rectangle_difference(F&& f, std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "rectangle corners must have the same dimension");
    require(!x.empty() && x.size() <= kMaxRectangleDim, "rectangle operator supports 1 to 3 dimensions");
    const std::size_t d = x.size();
    double corner[kMaxRectangleDim];
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
        int from_x = 0;
        for (std::size_t i = 0; i < d; ++i) {
            const bool take_y = (mask >> i) & 1u;
            corner[i] = take_y ? y[i] : x[i];
            from_x += take_y ? 0 : 1;
        }
        const double v = f(std::span<const double>(corner, d));
        total += (from_x % 2 == 0) ? v : -v;
    }
    return total;
}

/// Tensor-grid realization: values are row-major over `axes` (last axis
/// fastest); x and y are per-axis grid indices.
double rectangle_difference(std::span<const double> values, const std::vector<std::vector<double>>& axes,
                            std::span<const std::size_t> x, std::span<const std::size_t> y);

/// Omega(f, delta_vec) = sup |box difference| over corner pairs with
/// |x_i - y_i| <= delta_i, for tensor-grid realizations.
///
/// Per axis, ordered index pairs are grouped by their exact coordinate gap.
/// A path is reduced to a table of maxima over gap-level tuples followed by a
/// running maximum along every axis, after which each query is a lookup.
class RectangleModulusEvaluator {
public:
    explicit RectangleModulusEvaluator(std::vector<std::vector<double>> axes);

    /// Omega at each delta vector (each of size dim()).
    std::vector<double> evaluate(std::span<const double> values,
                                 const std::vector<std::vector<double>>& delta_vecs) const;

    std::size_t dim() const { return axes_.size(); }
    std::size_t points() const { return n_; }

private:
    struct AxisPair {
        std::uint32_t a, b;
    };
    struct Axis {
        std::vector<double> gaps;                     // distinct gaps, increasing; gaps[0] = 0
        std::vector<std::vector<AxisPair>> by_level;  // a < b pairs per gap level
    };

    std::vector<double> level_table(std::span<const double> values) const;

    std::vector<std::vector<double>> axes_;
    std::vector<Axis> levels_;
    std::vector<std::size_t> shape_;
    std::size_t n_ = 1;
};

double rectangle_modulus(std::span<const double> values, const std::vector<std::vector<double>>& axes,
                         std::span<const double> delta_vec);

/// Per-path Omega along the ray delta_vec(s) = s * direction, one column per
/// entry of s_grid (stored in ModulusSamples::deltas).
ModulusSamples rectangle_modulus_samples(const FieldEnsemble& ensemble, std::span<const double> direction,
                                         std::span<const double> s_grid);

/// gamma(delta_vec) = || Omega(xi, delta_vec) ||_Phi for each delta vector.
std::vector<double> gamma_function(const FieldEnsemble& ensemble, const std::vector<std::vector<double>>& delta_vecs,
                                   const OrliczFunction& phi);

}  // namespace fcont
