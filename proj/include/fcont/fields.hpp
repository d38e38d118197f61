#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fcont {

struct GeneratorInfo {
    std::string name;
    std::map<std::string, double> params;
    std::uint64_t seed = 0;
};

/// M independent realizations of a random field sampled at n points.
/// Row r is realization omega_r; column x is the point. When the field was
/// generated on a tensor grid, `axes` holds the per-axis coordinates and
/// points are numbered row-major (last axis fastest).
class FieldEnsemble {
public:
    FieldEnsemble() = default;
    FieldEnsemble(std::size_t realizations, std::size_t points, std::vector<double> values, GeneratorInfo info,
                  std::vector<std::vector<double>> axes = {});

    std::size_t realizations() const { return realizations_; }
    std::size_t points() const { return points_; }
    double operator()(std::size_t r, std::size_t x) const { return values_[r * points_ + x]; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * points_, points_}; }
    std::vector<double> column(std::size_t x) const;
    const std::vector<double>& values() const { return values_; }
    const std::vector<std::vector<double>>& axes() const { return axes_; }
    const GeneratorInfo& generator() const { return info_; }

    /// First m realizations.
    FieldEnsemble head(std::size_t m) const;
    FieldEnsemble scaled(double c) const;
    bool is_identically_zero() const;

private:
    std::size_t realizations_ = 0;
    std::size_t points_ = 0;
    std::vector<double> values_;
    GeneratorInfo info_;
    std::vector<std::vector<double>> axes_;
};

/// Counter-based stream derivation: realization r draws from an engine
/// seeded by a SplitMix64 hash of (master seed, r), so ensembles are
/// bit-identical whatever the worker count.
struct RngStreamSpec {
    std::uint64_t master_seed = 0;

    std::uint64_t stream_seed(std::uint64_t realization) const;
    std::mt19937_64 engine(std::uint64_t realization) const;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Wiener process on an increasing grid starting at 0.
FieldEnsemble simulate_brownian(std::span<const double> grid, std::size_t m, std::uint64_t seed);

/// Centered Gaussian vectors with the given covariance, via the symmetric
/// square root V sqrt(L) V^T of its eigendecomposition. Eigenvalues down to
/// -1e-10 (relative to the largest) are clipped to zero.
FieldEnsemble simulate_gaussian_field(const Eigen::MatrixXd& covariance, std::size_t m, std::uint64_t seed,
                                      std::vector<std::vector<double>> axes = {});

/// Fractional Brownian motion with Hurst index H in (0, 1).
FieldEnsemble simulate_fbm(double hurst, std::span<const double> grid, std::size_t m, std::uint64_t seed);

/// Symmetric alpha-stable Levy path: increments are Chambers-Mallows-Stuck
/// variates scaled by spacing^(1/alpha).
FieldEnsemble simulate_stable(double alpha, std::span<const double> grid, std::size_t m, std::uint64_t seed);

/// Brownian sheet (covariance prod_i min(s_i, t_i)) on a 2-d or 3-d tensor
/// grid whose axes start at 0.
FieldEnsemble simulate_brownian_sheet(const std::vector<std::vector<double>>& axes, std::size_t m,
                                      std::uint64_t seed);

Eigen::MatrixXd brownian_covariance(std::span<const double> grid);
Eigen::MatrixXd fbm_covariance(double hurst, std::span<const double> grid);

/// Z_m(y) = sign(y) [ln(1 + |y|)]^m.
double zm_transform(double y, double m);
FieldEnsemble apply_zm(const FieldEnsemble& ensemble, double m);

/// Standard symmetric stable variate (characteristic function exp(-|t|^alpha)).
double sample_symmetric_stable(double alpha, std::mt19937_64& engine);

}  // namespace fcont
