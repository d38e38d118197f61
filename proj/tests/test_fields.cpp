#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fcont/error.hpp"
#include "fcont/fields.hpp"
#include "fcont/knots.hpp"
#include "fcont/parallel.hpp"
#include "support.hpp"

using namespace fcont;
using testing::mean;
using testing::std_error;
using testing::variance;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov-Smirnov distance of samples to N(0, sd^2).
double ks_normal(std::vector<double> v, double sd) {
    std::sort(v.begin(), v.end());
    double d = 0.0;
    const double n = double(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double F = normal_cdf(v[i] / sd);
        d = std::max({d, std::abs(F - double(i) / n), std::abs(F - double(i + 1) / n)});
    }
    return d;
}

std::vector<double> squares(const std::vector<double>& v) {
    std::vector<double> out(v);
    for (double& x : out) x *= x;
    return out;
}

}  // namespace

TEST_CASE("brownian motion") {
    const auto grid = linspace(0.0, 1.0, 65);
    const auto ens = simulate_brownian(grid, 10000, 123);
    for (std::size_t r = 0; r < ens.realizations(); ++r) CHECK(ens(r, 0) == 0.0);
    for (std::size_t x : {8, 32, 64}) {
        const auto sq = squares(ens.column(x));
        CHECK(std::abs(mean(sq) - grid[x]) <= 3.0 * std_error(sq));
    }
    // disjoint increments are uncorrelated
    std::vector<double> prod;
    for (std::size_t r = 0; r < ens.realizations(); ++r)
        prod.push_back((ens(r, 20) - ens(r, 10)) * (ens(r, 50) - ens(r, 30)));
    CHECK(std::abs(mean(prod)) <= 3.0 * std_error(prod));
    CHECK_THROWS_AS(simulate_brownian(std::vector<double>{0.0, 0.5, 0.4}, 10, 1), InvalidInput);
    CHECK_THROWS_AS(simulate_brownian(std::vector<double>{0.1, 0.5}, 10, 1), InvalidInput);
}

TEST_CASE("generation is bit-identical across thread counts") {
    const auto grid = linspace(0.0, 1.0, 33);
    const std::size_t saved = thread_count();
    set_thread_count(1);
    const auto a = simulate_brownian(grid, 257, 42);
    const auto sa = simulate_stable(1.2, grid, 257, 42);
    set_thread_count(4);
    const auto b = simulate_brownian(grid, 257, 42);
    const auto sb = simulate_stable(1.2, grid, 257, 42);
    set_thread_count(saved);
    CHECK(a.values() == b.values());
    CHECK(sa.values() == sb.values());
    CHECK(simulate_brownian(grid, 257, 43).values() != a.values());
    CHECK(RngStreamSpec{1}.stream_seed(0) != RngStreamSpec{1}.stream_seed(1));
}

TEST_CASE("gaussian field") {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
    const auto ens = simulate_gaussian_field(id, 10000, 9);
    for (std::size_t x = 0; x < 4; ++x) {
        const auto sq = squares(ens.column(x));
        CHECK(std::abs(mean(sq) - 1.0) <= 3.0 * std_error(sq));
        CHECK(ks_normal(ens.column(x), 1.0) < 1.95 / std::sqrt(10000.0));  // KS level 1e-3
    }
    std::vector<double> cross;
    for (std::size_t r = 0; r < ens.realizations(); ++r) cross.push_back(ens(r, 0) * ens(r, 3));
    CHECK(std::abs(mean(cross)) <= 3.0 * std_error(cross));

    const auto zero = simulate_gaussian_field(Eigen::MatrixXd::Zero(3, 3), 50, 1);
    CHECK(zero.is_identically_zero());

    Eigen::MatrixXd asym = id;
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(simulate_gaussian_field(asym, 10, 1), InvalidInput);
    Eigen::MatrixXd indef = id;
    indef(0, 0) = -1.0;
    CHECK_THROWS_AS(simulate_gaussian_field(indef, 10, 1), InvalidInput);

    // Wiener covariance reproduces Brownian marginals
    const auto grid = linspace(0.0, 1.0, 9);
    const auto g = simulate_gaussian_field(brownian_covariance(grid), 10000, 3);
    CHECK(ks_normal(g.column(8), 1.0) < 1.95 / std::sqrt(10000.0));
    CHECK(ks_normal(g.column(2), std::sqrt(grid[2])) < 1.95 / std::sqrt(10000.0));
}

TEST_CASE("fractional brownian motion") {
    const auto grid = linspace(0.0, 1.0, 65);
    const auto half = fbm_covariance(0.5, grid);
    const auto bm = brownian_covariance(grid);
    CHECK((half - bm).cwiseAbs().maxCoeff() < 1e-14);

    const double H = 0.3;
    const auto ens = simulate_fbm(H, grid, 10000, 17);
    const auto sq = squares(ens.column(64));
    CHECK(std::abs(mean(sq) - 1.0) <= 3.0 * std_error(sq));

    std::vector<double> lx, ly;
    for (std::size_t gap : {1, 2, 4, 8, 16, 32}) {
        std::vector<double> inc;
        for (std::size_t r = 0; r < ens.realizations(); ++r) inc.push_back(ens(r, gap) - ens(r, 0));
        lx.push_back(std::log(grid[gap]));
        ly.push_back(0.5 * std::log(mean(squares(inc))));
    }
    CHECK(std::abs(least_squares_slope(lx, ly) - H) <= 0.05);
    CHECK_THROWS_AS(simulate_fbm(1.0, grid, 10, 1), InvalidInput);
    CHECK_THROWS_AS(simulate_fbm(0.0, grid, 10, 1), InvalidInput);
}

TEST_CASE("symmetric stable paths") {
    const auto grid = linspace(0.0, 1.0, 101);
    const double alpha = 1.2;
    const auto ens = simulate_stable(alpha, grid, 10000, 5);
    for (std::size_t r = 0; r < ens.realizations(); ++r) CHECK(ens(r, 0) == 0.0);

    // tail index from the log-log survival of standardized increments
    std::vector<double> mag;
    const double scale = std::pow(grid[1], 1.0 / alpha);
    for (std::size_t r = 0; r < ens.realizations(); ++r)
        for (std::size_t i = 1; i < grid.size(); ++i) mag.push_back(std::abs(ens(r, i) - ens(r, i - 1)) / scale);
    std::sort(mag.begin(), mag.end());
    std::vector<double> lu, ls;
    for (double u : logspace(5.0, 100.0, 12)) {
        const auto above = mag.end() - std::upper_bound(mag.begin(), mag.end(), u);
        lu.push_back(std::log(u));
        ls.push_back(std::log(double(above) / double(mag.size())));
    }
    CHECK(std::abs(-least_squares_slope(lu, ls) - alpha) <= 0.2);

    // alpha near 2: standardized variates approach N(0, 2)
    std::mt19937_64 eng(8);
    std::vector<double> near;
    for (int i = 0; i < 20000; ++i) near.push_back(sample_symmetric_stable(1.99, eng));
    CHECK(ks_normal(near, std::sqrt(2.0)) < 0.02);

    CHECK_THROWS_AS(simulate_stable(2.0, grid, 10, 1), InvalidInput);
    CHECK_THROWS_AS(simulate_stable(0.0, grid, 10, 1), InvalidInput);
}

TEST_CASE("heavy-tail transform") {
    CHECK(zm_transform(0.0, 2.0) == 0.0);
    CHECK(zm_transform(std::exp(1.0) - 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    const auto probes = testing::uniform_samples(1000, 0.0, 1e6, 2);
    for (double y : probes)
        for (double m : {0.5, 1.0, 3.0}) CHECK(zm_transform(-y, m) == -zm_transform(y, m));

    const auto ens = simulate_stable(1.2, linspace(0.0, 1.0, 33), 500, 4);
    const auto z = apply_zm(ens, 1.0);
    std::vector<std::size_t> order(ens.values().size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ens.values()[a] < ens.values()[b]; });
    for (std::size_t k = 0; k < order.size(); ++k) {
        const double y = ens.values()[order[k]], zy = z.values()[order[k]];
        CHECK(std::isfinite(zy));
        CHECK((y > 0) == (zy > 0));
        if (k > 0 && ens.values()[order[k - 1]] < y) CHECK(z.values()[order[k - 1]] < zy);
    }
}

TEST_CASE("brownian sheet") {
    const std::vector<std::vector<double>> axes{linspace(0.0, 1.0, 5), linspace(0.0, 1.0, 5)};
    const auto ens = simulate_brownian_sheet(axes, 10000, 21);
    REQUIRE(ens.points() == 25);
    // Var W(s, t) = s t
    for (auto [i, j] : {std::pair{4, 4}, std::pair{2, 4}, std::pair{1, 3}}) {
        const auto sq = squares(ens.column(std::size_t(i) * 5 + std::size_t(j)));
        CHECK(std::abs(mean(sq) - axes[0][i] * axes[1][j]) <= 3.0 * std_error(sq));
    }
    for (std::size_t r = 0; r < 20; ++r) CHECK(ens(r, 3) == 0.0);
}
