#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "fcont/error.hpp"
#include "fcont/orlicz.hpp"
#include "support.hpp"

using namespace fcont;
using fcont::testing::uniform_samples;

namespace {

// |zeta|_p computed directly, without the overflow scaling of moment_norm.
double direct_moment(const std::vector<double>& v, double p) {
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x), p);
    return std::pow(s / static_cast<double>(v.size()), 1.0 / p);
}

double bisect(auto f, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("luxemburg norm of constant samples") {
    const std::vector<double> c(17, 2.5);
    CHECK(luxemburg_norm(c, OrliczFunction::power(3.0)) == doctest::Approx(2.5).epsilon(1e-12));
    // exp(c^2 / 2k^2) - 1 = 1  =>  k = c / sqrt(2 ln 2)
    CHECK(luxemburg_norm(c, OrliczFunction::gaussian()) == doctest::Approx(2.5 / std::sqrt(2.0 * std::log(2.0))).epsilon(1e-12));
}

TEST_CASE("luxemburg norm of zero and of signs") {
    const std::vector<double> zero(8, 0.0);
    CHECK(luxemburg_norm(zero, OrliczFunction::power(2.0)) == 0.0);
    const std::vector<double> signs{1, -1, 1, -1, -1, 1};
    CHECK(luxemburg_norm(signs, OrliczFunction::power(2.0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("luxemburg norm under a power function is the p-th moment") {
    const auto s = uniform_samples(1000, -3.0, 3.0, 11);
    for (double p : {1.0, 1.5, 2.0, 4.0, 7.0})
        CHECK(luxemburg_norm(s, OrliczFunction::power(p)) == doctest::Approx(direct_moment(s, p)).epsilon(1e-9));
}

TEST_CASE("luxemburg norm is homogeneous, monotone and subadditive") {
    const auto x = uniform_samples(500, -2.0, 2.0, 3);
    const auto y = uniform_samples(500, -1.0, 4.0, 4);
    for (const auto& phi : {OrliczFunction::gaussian(), OrliczFunction::exp_power(1.0), OrliczFunction::power(2.0)}) {
        const double nx = luxemburg_norm(x, phi), ny = luxemburg_norm(y, phi);
        std::vector<double> sx(x), sum(x.size()), bigger(x);
        for (double& v : sx) v *= 3.0;
        for (std::size_t i = 0; i < x.size(); ++i) sum[i] = x[i] + y[i];
        for (double& v : bigger) v *= 1.1;
        CHECK(luxemburg_norm(sx, phi) == doctest::Approx(3.0 * nx).epsilon(1e-10));
        CHECK(luxemburg_norm(sum, phi) <= (nx + ny) * (1.0 + 1e-10));
        CHECK(luxemburg_norm(bigger, phi) >= nx);
    }
}

TEST_CASE("luxemburg norm rejects non-finite samples") {
    const std::vector<double> bad{1.0, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(luxemburg_norm(bad, OrliczFunction::power(2.0)), InvalidInput);
    CHECK_THROWS_AS(luxemburg_norm(std::vector<double>{}, OrliczFunction::power(2.0)), InvalidInput);
}

TEST_CASE("orlicz inverse matches bisection oracle") {
    const double ln2 = std::log(2.0);
    CHECK(OrliczFunction::gaussian().inverse(1.0) == doctest::Approx(std::sqrt(2.0 * ln2)).epsilon(1e-12));
    CHECK(OrliczFunction::exp_power(2.0).inverse(3.0) == doctest::Approx(std::sqrt(std::log(4.0))).epsilon(1e-12));
    CHECK(OrliczFunction::power(3.0).inverse(8.0) == doctest::Approx(2.0).epsilon(1e-12));
    const auto tab = OrliczFunction::table({{1.0, 1.0}, {2.0, 3.0}});
    CHECK(tab(3.0) == doctest::Approx(5.0));
    CHECK(tab.inverse(2.0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("halving inequality on every family") {
    const auto probes = uniform_samples(1000, 0.0, 12.0, 5);
    for (const auto& phi : {OrliczFunction::power(1.0), OrliczFunction::power(3.0), OrliczFunction::exp_power(1.0),
                            OrliczFunction::exp_power(2.0), OrliczFunction::gaussian(),
                            OrliczFunction::table({{1.0, 0.5}, {2.0, 2.0}, {3.0, 6.0}})})
        for (double u : probes) CHECK(phi(u / 2.0) <= phi(u) / 2.0 * (1.0 + 1e-14));
}

TEST_CASE("grand lebesgue norm") {
    const auto s = uniform_samples(800, -1.0, 2.0, 9);
    const auto grid = default_p_grid();
    CHECK(grand_lebesgue_norm(s, PsiFunction::degenerate(3.0), grid) == doctest::Approx(direct_moment(s, 3.0)).epsilon(1e-12));
    CHECK(grand_lebesgue_norm(std::vector<double>(5, 1.75), PsiFunction::constant(1.0), grid) == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(grand_lebesgue_norm(std::vector<double>(5, 0.0), PsiFunction::constant(1.0), grid) == 0.0);
    // sup_p |zeta|_p / p over the grid, by direct enumeration
    double expect = 0.0;
    for (double p : grid) expect = std::max(expect, direct_moment(s, p) / p);
    CHECK(grand_lebesgue_norm(s, PsiFunction::power(1.0), grid) == doctest::Approx(expect).epsilon(1e-12));
    CHECK_THROWS_AS(grand_lebesgue_norm(s, PsiFunction::power(1.0, 1.0, 4.0), std::vector<double>{2.0, 5.0}), InvalidInput);
}

TEST_CASE("natural function") {
    const auto grid = default_p_grid();
    const auto signs = testing::ensemble_from_rows({{1.0}, {-1.0}, {1.0}, {-1.0}});
    const auto psi = natural_psi(signs, grid);
    for (double p : grid) CHECK(psi(p) == doctest::Approx(1.0).epsilon(1e-12));
    const auto zero = testing::ensemble_from_rows({{0.0, 0.0}, {0.0, 0.0}});
    CHECK(natural_psi(zero, grid).is_zero());
}

TEST_CASE("delta2 heuristic") {
    const auto u = logspace(1.0, 30.0, 40);
    const auto pw = check_delta2(OrliczFunction::power(3.0), u);
    CHECK(pw.holds);
    CHECK(pw.heuristic);
    for (const auto& k : pw.trace) CHECK(k.y == doctest::Approx(8.0).epsilon(1e-9));
    CHECK_FALSE(check_delta2(OrliczFunction::exp_power(2.0), u).holds);
    CHECK_FALSE(check_delta2(OrliczFunction::gaussian(), u).holds);
}

TEST_CASE("nabla2 constant") {
    std::vector<std::pair<double, double>> pairs;
    for (double x : linspace(0.1, 10.0, 25))
        for (double y : linspace(0.1, 10.0, 25)) pairs.emplace_back(x, y);
    CHECK_FALSE(nabla2_constant(OrliczFunction::power(2.0), pairs).has_value());
    const auto k = nabla2_constant(OrliczFunction::exp_power(1.0), pairs);
    REQUIRE(k.has_value());
    // oracle: the smallest K on the pairs, by bisection per pair
    const auto phi = OrliczFunction::exp_power(1.0);
    double need = 1.0;
    for (auto [x, y] : pairs)
        need = std::max(need, bisect([&](double K) { return phi(K * (x + y)) - phi(x) * phi(y); }, 0.0, 10.0));
    CHECK(*k >= need * (1.0 - 1e-9));
    CHECK(*k <= need * 1.01 + 1e-9);
    const std::vector<std::pair<double, double>> origin{{0.0, 0.0}};
    CHECK(nabla2_constant(OrliczFunction::gaussian(), origin) == doctest::Approx(1.0));
}

TEST_CASE("c2 constant") {
    const double ln2 = std::log(2.0);
    CHECK(c2_constant(OrliczFunction::gaussian(), 1.0) == doctest::Approx(std::sqrt(2.0 * ln2) / 54.0).epsilon(1e-12));
    CHECK(c2_constant(OrliczFunction::gaussian(), 2.0) ==
          doctest::Approx(c2_constant(OrliczFunction::gaussian(), 1.0) / 4.0).epsilon(1e-14));
    CHECK(c2_constant(OrliczFunction::power(1.0), 1.0) == doctest::Approx(1.0 / 54.0).epsilon(1e-12));
    CHECK_THROWS_AS(c2_constant(OrliczFunction::power(1.0), 0.5), InvalidInput);
}

TEST_CASE("legendre transform") {
    const auto p = linspace(0.0, 10.0, 10001);
    std::vector<Knot> quad, lin;
    for (double x : p) {
        quad.push_back({x, 0.5 * x * x});
        lin.push_back({x, 2.0 * x});
    }
    const auto lam = linspace(0.0, 5.0, 51);
    const auto q = legendre_transform(KnotFunction(quad), lam);
    for (const auto& k : q.knots()) CHECK(k.y == doctest::Approx(0.5 * k.x * k.x).epsilon(1e-6));
    const auto l = legendre_transform(KnotFunction(lin), std::vector<double>{0.5, 1.9, 3.0});
    CHECK(l(0.5) == doctest::Approx(0.0));
    CHECK(l(1.9) == doctest::Approx(0.0));
    CHECK(l(3.0) == doctest::Approx(10.0));  // grid-capped: (3 - 2) * 10
    // Fenchel-Young on all grid pairs
    for (const auto& k : q.knots())
        for (std::size_t i = 0; i < p.size(); i += 97) CHECK(k.x * p[i] <= 0.5 * p[i] * p[i] + k.y + 1e-9);
    CHECK_THROWS_AS(legendre_transform(KnotFunction(), lam), InvalidInput);
}

TEST_CASE("v_star") {
    CHECK(v_star(PsiFunction::constant(3.0), 2.0) == doctest::Approx(std::log(3.0)).epsilon(1e-6));
    for (double w : {1.5, 3.0, 10.0, 40.0})
        CHECK(v_star(PsiFunction::power(1.0), w) == doctest::Approx(1.0 + std::log(w)).epsilon(1e-8));
    // upper bound by every probe z
    const auto psi = PsiFunction::power(1.5);
    for (double z : linspace(0.01, 0.99, 50)) CHECK(v_star(psi, 4.0) <= z * 4.0 + std::log(psi(1.0 / z)) + 1e-12);
}

TEST_CASE("weaker-than heuristic") {
    const auto u = logspace(1.0, 40.0, 64);
    const std::vector<double> v{0.5, 1.0, 2.0};
    CHECK(is_weaker(OrliczFunction::exp_power(1.0), OrliczFunction::exp_power(2.0), v, u).holds);
    CHECK_FALSE(is_weaker(OrliczFunction::gaussian(), OrliczFunction::gaussian(), std::vector<double>{1.0}, u).holds);
    CHECK(is_weaker(OrliczFunction::power(2.0), OrliczFunction::exp_power(1.0), v, u).holds);
}
