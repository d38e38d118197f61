#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fcont/config.hpp"
#include "fcont/error.hpp"
#include "fcont/fields.hpp"
#include "fcont/metric.hpp"
#include "support.hpp"

using namespace fcont;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exact minimal closed-ball cover of points on a line with centres from the
// set: cover the leftmost uncovered point with the furthest admissible centre.
std::size_t line_cover_oracle(std::vector<double> x, double eps) {
    std::sort(x.begin(), x.end());
    std::size_t count = 0, i = 0;
    while (i < x.size()) {
        const double left = x[i];
        std::size_t c = i;
        while (c + 1 < x.size() && x[c + 1] - left <= eps) ++c;
        const double reach = x[c] + eps;
        while (i < x.size() && x[i] <= reach) ++i;
        ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("extended integer space") {
    const auto s = extended_integer_space(64);
    REQUIRE(s.size() == 65);
    const std::size_t inf = 64;
    CHECK(s(2, inf) == doctest::Approx(1.0 / 3.0));
    CHECK(s(inf, inf) == 0.0);
    CHECK(s(1, 3) == doctest::Approx(0.25));
    // isometric embedding n -> 1/n, infinity -> 0
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
            const double xi = i == inf ? 0.0 : 1.0 / double(i + 1);
            const double xj = j == inf ? 0.0 : 1.0 / double(j + 1);
            CHECK(s(i, j) == doctest::Approx(std::abs(xi - xj)).epsilon(1e-15));
        }
    const auto audit = audit_triangle(s);
    CHECK(audit.ok);
    CHECK(audit.exhaustive);
    CHECK(audit.triples_checked >= 65u * 65u * 65u / 6u);
    CHECK_THROWS_AS(extended_integer_space(1), InvalidInput);
}

TEST_CASE("dense space validation and audit") {
    CHECK_THROWS_AS(DiscreteMetricSpace({"a", "b"}, {0, 1, 2, 0}), InvalidInput);
    CHECK_THROWS_AS(DiscreteMetricSpace({"a", "b"}, {1, 1, 1, 0}), InvalidInput);
    CHECK_THROWS_AS(DiscreteMetricSpace({"a", "b"}, {0, -1, -1, 0}), InvalidInput);
    const DiscreteMetricSpace bad({"a", "b", "c"}, {0, 1, 5, 1, 0, 1, 5, 1, 0});
    const auto audit = audit_triangle(bad);
    CHECK_FALSE(audit.ok);
    CHECK(audit.worst_excess == doctest::Approx(3.0));
    const DiscreteMetricSpace twins({"a", "b"}, {0, 0, 0, 0});
    CHECK(twins.is_pseudometric());
}

TEST_CASE("covering numbers") {
    const auto line = DiscreteMetricSpace::line(linspace(0.0, 1.0, 1001));
    const auto big = covering_number(line, {}, 1.0);
    CHECK(big.lower == 1);
    CHECK(big.upper == 1);
    const auto quarter = covering_number(line, {}, 0.25);
    const auto oracle = line_cover_oracle(linspace(0.0, 1.0, 1001), 0.25);
    CHECK(oracle == 2);
    CHECK(quarter.lower <= oracle);
    CHECK(quarter.upper >= oracle);
    CHECK(quarter.entropy_upper == doctest::Approx(std::log(double(quarter.upper))));
    CHECK_THROWS_AS(covering_number(line, {}, 0.0), InvalidInput);

    const auto ext = extended_integer_space(64);
    std::vector<double> embed;
    for (int n = 1; n <= 64; ++n) embed.push_back(1.0 / n);
    embed.push_back(0.0);
    for (double eps : {0.01, 0.05, 0.1, 0.2}) {
        const auto c = covering_number(ext, {}, eps);
        const auto exact = line_cover_oracle(embed, eps);
        CHECK(c.lower <= exact);
        CHECK(c.upper >= exact);
    }

    // exhaustive path on a small subset
    const std::vector<std::size_t> sub{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 64};
    std::vector<double> sub_x;
    for (auto i : sub) sub_x.push_back(i == 64 ? 0.0 : 1.0 / double(i + 1));
    for (double eps : {0.02, 0.05, 0.1, 0.3}) {
        const auto c = covering_number(ext, sub, eps);
        REQUIRE(c.exact.has_value());
        CHECK(*c.exact == line_cover_oracle(sub_x, eps));
        CHECK(c.lower <= *c.exact);
        CHECK(*c.exact <= c.upper);
    }
}

TEST_CASE("covering profile is monotone") {
    const auto ext = extended_integer_space(40);
    const auto eps = logspace(1e-4, 1.0, 30);
    const auto prof = covering_profile(ext, {}, eps);
    for (std::size_t k = 0; k < prof.size(); ++k) {
        CHECK(prof[k].lower <= prof[k].upper);
        if (k > 0) {
            CHECK(prof[k].upper <= prof[k - 1].upper);
            CHECK(prof[k].lower <= prof[k - 1].lower);
        }
    }
}

TEST_CASE("ball mass") {
    const DiscreteMetricSpace two({"a", "b"}, {0, 1, 1, 0});
    const auto m = DiscreteMeasure::uniform(2);
    CHECK(ball_mass(two, m, 0, 0.0) == doctest::Approx(0.5));
    CHECK(ball_mass(two, m, 0, 0.5) == doctest::Approx(0.5));
    CHECK(ball_mass(two, m, 0, 1.0) == doctest::Approx(1.0));
    const auto line = DiscreteMetricSpace::line(linspace(0.0, 1.0, 11));
    const DiscreteMeasure w({0.3, 0.1, 0.1, 0.1, 0.05, 0.05, 0.05, 0.05, 0.1, 0.05, 0.05});
    double prev = 0.0;
    for (double r : linspace(0.0, 1.0, 101)) {
        const double b = ball_mass(line, w, 4, r);
        CHECK(b >= prev);
        prev = b;
    }
    CHECK(prev == doctest::Approx(1.0));
    CHECK_THROWS_AS(DiscreteMeasure({0.5, 0.6}), InvalidInput);
    CHECK_THROWS_AS(DiscreteMeasure({1.5, -0.5}), InvalidInput);
}

TEST_CASE("distances built from ensembles") {
    // identical columns
    const auto same = testing::ensemble_from_rows({{1, 1, 1}, {-2, -2, -2}, {0.5, 0.5, 0.5}});
    const auto d_same = orlicz_distance(same, OrliczFunction::power(2.0));
    CHECK(d_same.diameter() == 0.0);
    CHECK(gaussian_distance(same).diameter() == 0.0);
    CHECK(natural_distance(same, PsiFunction::constant(1.0), default_p_grid()).diameter() == 0.0);

    // x1 = 0, x2 = +-1
    const auto pm = testing::ensemble_from_rows({{0, 1}, {0, -1}, {0, 1}, {0, -1}});
    CHECK(natural_distance(pm, PsiFunction::constant(1.0), default_p_grid())(0, 1) == doctest::Approx(1.0));

    // xi(x) = x * eta: d_G = |x - y| * sd(eta)
    std::mt19937_64 eng(5);
    std::normal_distribution<double> nd;
    std::vector<std::vector<double>> rows(4000, std::vector<double>(3));
    std::vector<double> eta;
    for (auto& r : rows) {
        const double e = nd(eng);
        eta.push_back(e);
        r = {0.0, 0.5 * e, 2.0 * e};
    }
    const auto xe = testing::ensemble_from_rows(rows);
    const double sd = std::sqrt(testing::variance(eta));
    const auto dg = gaussian_distance(xe);
    CHECK(dg(0, 1) == doctest::Approx(0.5 * sd).epsilon(1e-12));
    CHECK(dg(1, 2) == doctest::Approx(1.5 * sd).epsilon(1e-12));
    // Phi_2 Luxemburg is the L2 norm of the increment
    double l2 = 0.0;
    for (double e : eta) l2 += 2.25 * e * e;
    CHECK(orlicz_distance(xe, OrliczFunction::power(2.0))(1, 2) == doctest::Approx(std::sqrt(l2 / 4000.0)).epsilon(1e-9));
    CHECK_THROWS_AS(gaussian_distance(testing::ensemble_from_rows({{1.0, 2.0}})), InvalidInput);
    CHECK_THROWS_AS(natural_distance(testing::ensemble_from_rows({{0.0, 0.0}, {0.0, 0.0}}),
                                     natural_psi(testing::ensemble_from_rows({{0.0, 0.0}, {0.0, 0.0}}), default_p_grid()),
                                     default_p_grid()),
                    DegenerateField);
}

TEST_CASE("brownian natural distance under psi_(2)") {
    const auto grid = linspace(0.0, 1.0, 9);
    const std::size_t M = 20000;
    const auto ens = simulate_brownian(grid, M, 77);
    const auto d = natural_distance(ens, PsiFunction::degenerate(2.0), std::vector<double>{2.0});
    for (std::size_t i = 0; i < grid.size(); i += 2)
        for (std::size_t j = i + 1; j < grid.size(); j += 3) {
            const double h = grid[j] - grid[i];
            // E (w_t - w_s)^2 = h; squared increments have variance 2 h^2
            const double se = std::sqrt(2.0 * h * h / double(M));
            CHECK(std::abs(d(i, j) * d(i, j) - h) <= 3.0 * se);
        }
    CHECK(audit_triangle(d).ok);
}
