#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcont/orlicz.hpp"

namespace fcont {

class FieldEnsemble;

/// Finite (pseudo)metric space standing in for a compact (X, d).
///
/// Two storage modes: a dense symmetric distance matrix, or sorted 1-d
/// coordinates with d(x, y) = |x - y| ("line" spaces), which the modulus
/// code exploits for window sweeps.
class DiscreteMetricSpace {
public:
    DiscreteMetricSpace() = default;
    /// Dense matrix, row-major n x n. Validates zero diagonal, symmetry and
    /// non-negativity; the triangle inequality is left to audit_triangle().
    DiscreteMetricSpace(std::vector<std::string> labels, std::vector<double> dist,
                        std::vector<std::vector<double>> coords = {});

    /// Points on the real line; coordinates must be strictly increasing.
    static DiscreteMetricSpace line(std::vector<double> coords);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const;
    double diameter() const { return diameter_; }
    /// Smallest strictly positive distance (0 for a one-point space).
    double min_positive_distance() const { return min_positive_; }
    bool is_line() const { return line_; }
    /// Distinct points at distance zero exist.
    bool is_pseudometric() const { return pseudo_; }

    const std::vector<std::string>& labels() const { return labels_; }
    /// Optional per-point coordinates (line spaces: one coordinate each).
    const std::vector<std::vector<double>>& coords() const { return coords_; }
    const std::vector<double>& line_coords() const { return line_x_; }

private:
    void finish();

    std::size_t n_ = 0;
    std::vector<std::string> labels_;
    std::vector<double> dist_;
    std::vector<std::vector<double>> coords_;
    std::vector<double> line_x_;
    bool line_ = false;
    bool pseudo_ = false;
    double diameter_ = 0.0;
    double min_positive_ = 0.0;
};

struct TriangleAudit {
    bool ok = true;
    bool exhaustive = true;
    std::size_t triples_checked = 0;
    double worst_excess = 0.0;  // max of d(i,k) - d(i,j) - d(j,k)
    std::size_t i = 0, j = 0, k = 0;
};

/// Exhaustive over all triples when n <= 200, otherwise `samples` random
/// triples. Excess tolerance is 1e-12 relative to the diameter.
TriangleAudit audit_triangle(const DiscreteMetricSpace& space, std::size_t samples = 100000,
                             std::uint64_t seed = 1);

/// Probability weights on the points of a space.
class DiscreteMeasure {
public:
    explicit DiscreteMeasure(std::vector<double> weights);
    static DiscreteMeasure uniform(std::size_t n);

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    const std::vector<double>& weights() const { return w_; }

private:
    std::vector<double> w_;
};

/// {1, ..., n_max, inf} with d(m, n) = |1/n - 1/m| and d(n, inf) = 1/n.
DiscreteMetricSpace extended_integer_space(int n_max);

/// d(x, y) = || xi(x) - xi(y) ||_{G psi}.
DiscreteMetricSpace natural_distance(const FieldEnsemble& ensemble, const PsiFunction& psi,
                                     std::span<const double> p_grid);

/// d(x, y) = || xi(x) - xi(y) ||_Phi (Luxemburg).
DiscreteMetricSpace orlicz_distance(const FieldEnsemble& ensemble, const OrliczFunction& phi);

/// d(x, y) = empirical standard deviation of xi(x) - xi(y).
DiscreteMetricSpace gaussian_distance(const FieldEnsemble& ensemble);

struct CoveringNumber {
    std::size_t lower = 0;  // size of a greedy 2 eps-separated set
    std::size_t upper = 0;  // size of a greedy eps-cover
    std::optional<std::size_t> exact;  // exhaustive search, |subset| <= 12
    double entropy_upper = 0.0;  // ln(upper)
};

/// Closed-ball covering number N(V, d, eps) of `subset` (all points when
/// empty) with centres drawn from the subset.
CoveringNumber covering_number(const DiscreteMetricSpace& space, std::span<const std::size_t> subset, double eps);

/// Covering numbers over an increasing eps grid. Upper bounds are running
/// minima (a cover at eps is a cover at every larger radius) and lower bounds
/// running maxima from the right, so both are non-increasing in eps.
std::vector<CoveringNumber> covering_profile(const DiscreteMetricSpace& space, std::span<const std::size_t> subset,
                                             std::span<const double> eps_grid);

/// m(B(r, x)) for the closed ball of radius r.
double ball_mass(const DiscreteMetricSpace& space, const DiscreteMeasure& measure, std::size_t x, double r);

}  // namespace fcont
