#include "fcont/fields.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "fcont/error.hpp"
#include "fcont/parallel.hpp"

namespace fcont {

FieldEnsemble::FieldEnsemble(std::size_t realizations, std::size_t points, std::vector<double> values,
                             GeneratorInfo info, std::vector<std::vector<double>> axes)
    : realizations_(realizations), points_(points), values_(std::move(values)), info_(std::move(info)),
      axes_(std::move(axes)) {
    require(realizations_ >= 1, "ensemble needs at least one realization");
    require(points_ >= 1, "ensemble needs at least one point");
    require(values_.size() == realizations_ * points_, "ensemble value count does not match M x n");
    for (double v : values_) require(std::isfinite(v), "ensemble values must be finite");
    if (!axes_.empty()) {
        std::size_t n = 1;
        for (const auto& a : axes_) n *= a.size();
        require(n == points_, "tensor grid size does not match the point count");
    }
}

std::vector<double> FieldEnsemble::column(std::size_t x) const {
    std::vector<double> out(realizations_);
    for (std::size_t r = 0; r < realizations_; ++r) out[r] = values_[r * points_ + x];
    return out;
}

FieldEnsemble FieldEnsemble::head(std::size_t m) const {
    require(m >= 1 && m <= realizations_, "head size out of range");
    std::vector<double> v(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(m * points_));
    return FieldEnsemble(m, points_, std::move(v), info_, axes_);
}

FieldEnsemble FieldEnsemble::scaled(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    GeneratorInfo info = info_;
    info.params["scale"] = c * (info_.params.count("scale") ? info_.params.at("scale") : 1.0);
    return FieldEnsemble(realizations_, points_, std::move(v), std::move(info), axes_);
}

bool FieldEnsemble::is_identically_zero() const {
    for (double v : values_)
        if (v != 0.0) return false;
    return true;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t RngStreamSpec::stream_seed(std::uint64_t realization) const {
    return splitmix64(splitmix64(master_seed) ^ splitmix64(realization + 0x632be59bd9b4e019ULL));
}

std::mt19937_64 RngStreamSpec::engine(std::uint64_t realization) const {
    return std::mt19937_64(stream_seed(realization));
}

namespace {

void check_grid(std::span<const double> grid, bool from_zero) {
    require(grid.size() >= 2, "grid needs at least two points");
    if (from_zero) require(grid[0] == 0.0, "grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        require(grid[i] > grid[i - 1], "grid must be strictly increasing");
}

// Fills row r of an M x n buffer in parallel, one stream per realization.
template <class RowFill>
std::vector<double> generate_rows(std::size_t m, std::size_t n, std::uint64_t seed, RowFill fill) {
    require(m >= 1, "need at least one realization");
    std::vector<double> values(m * n);
    const RngStreamSpec streams{seed};
    parallel_for(m, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            auto engine = streams.engine(r);
            fill(std::span<double>(values.data() + r * n, n), engine);
        }
    });
    return values;
}

}  // namespace

FieldEnsemble simulate_brownian(std::span<const double> grid, std::size_t m, std::uint64_t seed) {
    check_grid(grid, true);
    const std::size_t n = grid.size();
    std::vector<double> sd(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) sd[i] = std::sqrt(grid[i] - grid[i - 1]);
    auto values = generate_rows(m, n, seed, [&](std::span<double> row, std::mt19937_64& eng) {
        std::normal_distribution<double> normal;
        row[0] = 0.0;
        for (std::size_t i = 1; i < n; ++i) row[i] = row[i - 1] + sd[i] * normal(eng);
    });
    GeneratorInfo info{"brownian", {}, seed};
    return FieldEnsemble(m, n, std::move(values), std::move(info), {std::vector<double>(grid.begin(), grid.end())});
}

FieldEnsemble simulate_gaussian_field(const Eigen::MatrixXd& covariance, std::size_t m, std::uint64_t seed,
                                      std::vector<std::vector<double>> axes) {
    const auto n = static_cast<std::size_t>(covariance.rows());
    require(n >= 1 && covariance.cols() == covariance.rows(), "covariance must be square");
    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    require((covariance - covariance.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
            "covariance must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
    require(eig.info() == Eigen::Success, "covariance eigendecomposition failed");
    Eigen::VectorXd lambda = eig.eigenvalues();
    const double top = std::max(0.0, lambda.maxCoeff());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        require(lambda(i) >= -1e-10 * std::max(1.0, top), "covariance is not positive semi-definite");
        lambda(i) = std::sqrt(std::max(0.0, lambda(i)));
    }
    const Eigen::MatrixXd root = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
    auto values = generate_rows(m, n, seed, [&](std::span<double> row, std::mt19937_64& eng) {
        std::normal_distribution<double> normal;
        Eigen::VectorXd z(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) z(static_cast<Eigen::Index>(i)) = normal(eng);
        Eigen::Map<Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(n)).noalias() = root * z;
    });
    GeneratorInfo info{"gaussian", {}, seed};
    return FieldEnsemble(m, n, std::move(values), std::move(info), std::move(axes));
}

Eigen::MatrixXd brownian_covariance(std::span<const double> grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd c(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) c(i, j) = std::min(grid[i], grid[j]);
    return c;
}

Eigen::MatrixXd fbm_covariance(double hurst, std::span<const double> grid) {
    require(hurst > 0.0 && hurst < 1.0, "Hurst index must lie in (0, 1)");
    const auto n = static_cast<Eigen::Index>(grid.size());
    const double h2 = 2.0 * hurst;
    Eigen::MatrixXd c(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double s = std::abs(grid[i]), t = std::abs(grid[j]);
            c(i, j) = 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(grid[i] - grid[j]), h2));
        }
    return c;
}

FieldEnsemble simulate_fbm(double hurst, std::span<const double> grid, std::size_t m, std::uint64_t seed) {
    require(hurst > 0.0 && hurst < 1.0, "Hurst index must lie in (0, 1)");
    check_grid(grid, false);
    auto ens = simulate_gaussian_field(fbm_covariance(hurst, grid), m, seed,
                                       {std::vector<double>(grid.begin(), grid.end())});
    GeneratorInfo info{"fbm", {{"hurst", hurst}}, seed};
    std::vector<double> values = ens.values();
    return FieldEnsemble(m, grid.size(), std::move(values), std::move(info), ens.axes());
}

double sample_symmetric_stable(double alpha, std::mt19937_64& engine) {
    constexpr double half_pi = std::numbers::pi / 2.0;
    std::uniform_real_distribution<double> uniform(-half_pi, half_pi);
    std::exponential_distribution<double> exponential(1.0);
    double v = uniform(engine);
    while (v == -half_pi) v = uniform(engine);
    const double w = exponential(engine);
    if (alpha == 1.0) return std::tan(v);
    return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
}

FieldEnsemble simulate_stable(double alpha, std::span<const double> grid, std::size_t m, std::uint64_t seed) {
    require(alpha > 0.0 && alpha < 2.0, "stable index alpha must lie in (0, 2)");
    check_grid(grid, true);
    const std::size_t n = grid.size();
    std::vector<double> scale(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) scale[i] = std::pow(grid[i] - grid[i - 1], 1.0 / alpha);
    auto values = generate_rows(m, n, seed, [&](std::span<double> row, std::mt19937_64& eng) {
        row[0] = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            double x = sample_symmetric_stable(alpha, eng);
            // cos(v) can underflow to zero at the edge of the uniform range
            while (!std::isfinite(x)) x = sample_symmetric_stable(alpha, eng);
            row[i] = row[i - 1] + scale[i] * x;
        }
    });
    GeneratorInfo info{"stable", {{"alpha", alpha}}, seed};
    return FieldEnsemble(m, n, std::move(values), std::move(info), {std::vector<double>(grid.begin(), grid.end())});
}

FieldEnsemble simulate_brownian_sheet(const std::vector<std::vector<double>>& axes, std::size_t m,
                                      std::uint64_t seed) {
    require(axes.size() == 2 || axes.size() == 3, "Brownian sheet supports 2 or 3 axes");
    for (const auto& a : axes) check_grid(a, true);
    const std::size_t d = axes.size();
    std::vector<std::size_t> shape(d);
    std::size_t n = 1;
    for (std::size_t i = 0; i < d; ++i) {
        shape[i] = axes[i].size();
        n *= shape[i];
    }
    auto values = generate_rows(m, n, seed, [&](std::span<double> row, std::mt19937_64& eng) {
        std::normal_distribution<double> normal;
        // white-noise cell masses, then cumulative sums along every axis
        std::vector<std::size_t> idx(d, 0);
        for (std::size_t flat = 0; flat < n; ++flat) {
            std::size_t rem = flat;
            for (std::size_t k = d; k-- > 0;) {
                idx[k] = rem % shape[k];
                rem /= shape[k];
            }
            double vol = 1.0;
            bool boundary = false;
            for (std::size_t k = 0; k < d; ++k) {
                if (idx[k] == 0) {
                    boundary = true;
                    break;
                }
                vol *= axes[k][idx[k]] - axes[k][idx[k] - 1];
            }
            row[flat] = boundary ? 0.0 : std::sqrt(vol) * normal(eng);
        }
        std::size_t stride = 1;
        for (std::size_t k = d; k-- > 0;) {
            for (std::size_t flat = 0; flat < n; ++flat) {
                const std::size_t ik = (flat / stride) % shape[k];
                if (ik > 0) row[flat] += row[flat - stride];
            }
            stride *= shape[k];
        }
    });
    GeneratorInfo info{"brownian_sheet", {}, seed};
    return FieldEnsemble(m, n, std::move(values), std::move(info), axes);
}

double zm_transform(double y, double m) {
    if (y == 0.0) return 0.0;
    const double mag = std::pow(std::log1p(std::abs(y)), m);
    return y > 0 ? mag : -mag;
}

FieldEnsemble apply_zm(const FieldEnsemble& ensemble, double m) {
    require(m > 0.0, "Z_m exponent must be positive");
    std::vector<double> v(ensemble.values());
    for (double& x : v) x = zm_transform(x, m);
    GeneratorInfo info = ensemble.generator();
    info.name += "+zm";
    info.params["zm_m"] = m;
    return FieldEnsemble(ensemble.realizations(), ensemble.points(), std::move(v), std::move(info), ensemble.axes());
}

}  // namespace fcont
