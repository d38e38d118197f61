#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fcont/error.hpp"
#include "fcont/factorize.hpp"
#include "fcont/fields.hpp"
#include "support.hpp"

using namespace fcont;

namespace {

// xi(x) = +-c x on sixteenths of [0, 1], with dyadic delta grid: Delta = c delta exactly.
struct LinearToy {
    std::vector<double> grid = linspace(0.0, 1.0, 17);
    DiscreteMetricSpace space = DiscreteMetricSpace::line(grid);
    std::vector<double> deltas{0.0, 0.0625, 0.125, 0.25, 0.5, 1.0};
    SequencePlan plan = SequencePlan::from_sequences({0.5, 0.25, 0.125}, {0.5, 0.25, 0.25});

    FieldEnsemble ensemble(double c) const {
        return testing::sign_times(8, grid, [c](double x) { return c * x; });
    }
};

// tau recomputed term by term, in reverse index order.
std::vector<double> tau_oracle(const FactorizationResult& res) {
    std::vector<double> tau(res.realizations, 0.0);
    const std::size_t J = res.active.size();
    for (std::size_t r = 0; r < res.realizations; ++r)
        for (std::size_t j = J; j-- > 0;)
            tau[r] += res.b_active[j] * res.knot_moduli[r * J + j] / res.plan.a[res.active[j]];
    return tau;
}

}  // namespace

TEST_CASE("default sequences") {
    for (double th : {0.5, 1.0, 2.0}) {
        const auto plan = default_sequences(1.0, th, 40);
        CHECK(plan.a[0] == 1.0);
        double sum = 0.0;
        for (std::size_t n = 0; n < plan.size(); ++n) {
            sum += plan.b[n];
            if (n > 0) CHECK(plan.a[n] < plan.a[n - 1]);
            CHECK(plan.a[n] == doctest::Approx(std::pow(double(n + 1), -1.0 - th)).epsilon(1e-15));
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
        // b_n proportional to 1 / (n ln^2 (n + 1)) for nu = 1
        const double r = plan.b[4] / plan.b[1];
        CHECK(r == doctest::Approx((2.0 * std::pow(std::log(3.0), 2)) / (5.0 * std::pow(std::log(6.0), 2))).epsilon(1e-13));
    }
    CHECK_THROWS_AS(default_sequences(0.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(default_sequences(1.0, -1.0), InvalidInput);
    CHECK_THROWS_AS(default_sequences(1.0, 1.0, 2), InvalidInput);
    CHECK_THROWS_AS(SequencePlan::from_sequences({1.0, 1.0, 0.5}, {0.2, 0.3, 0.5}), InvalidInput);
    CHECK_THROWS_AS(SequencePlan::from_sequences({1.0, 0.5, 0.2}, {0.2, 0.3, 0.4}), InvalidInput);
}

TEST_CASE("solve knots") {
    std::vector<Knot> lin;
    for (double d : linspace(0.0, 1.0, 101)) lin.push_back({d, d});
    const KnotFunction theta(lin);
    const auto plan = SequencePlan::from_sequences({1.0, 0.25, 1.0 / 9.0, 1.0 / 16.0}, {0.4, 0.3, 0.2, 0.1});
    const auto sol = solve_knots(theta, plan);
    for (std::size_t n = 0; n < plan.size(); ++n) {
        CHECK(sol.status[n] == KnotStatus::ok);
        CHECK(sol.delta[n] == doctest::Approx(plan.a[n]).epsilon(1e-14));
    }
    const auto big = SequencePlan::from_sequences({2.0, 0.5, 0.1}, {0.4, 0.3, 0.3});
    const auto clamped = solve_knots(theta, big);
    CHECK(clamped.status[0] == KnotStatus::clamped);
    CHECK(clamped.delta[0] == 1.0);
    CHECK(clamped.usable() == std::vector<std::size_t>{1, 2});

    // noisy theta: the isotonic fit is inverted, knots stay monotone
    const KnotFunction noisy({{0.0, 0.0}, {0.1, 0.3}, {0.2, 0.2}, {0.3, 0.5}, {0.4, 0.45}, {0.5, 0.9}});
    const auto pn = SequencePlan::from_sequences({0.8, 0.4, 0.1}, {0.5, 0.3, 0.2});
    const auto sn = solve_knots(noisy, pn);
    CHECK(sn.theta_fit.is_nondecreasing());
    for (std::size_t n = 0; n < 3; ++n) CHECK(sn.theta_fit(sn.delta[n]) == doctest::Approx(pn.a[n]).epsilon(1e-12));
    CHECK(sn.delta[0] > sn.delta[1]);
    CHECK(sn.delta[1] > sn.delta[2]);

    CHECK_THROWS_AS(solve_knots(KnotFunction({{0.0, 0.0}, {1.0, 0.0}}), plan), DegenerateField);
}

TEST_CASE("linear toy factorization") {
    const LinearToy toy;
    const auto res = build_factorization(toy.ensemble(1.0), toy.space, toy.plan, OrliczFunction::power(2.0), toy.deltas);
    REQUIRE(res.active.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) CHECK(res.knots.delta[res.active[j]] == doctest::Approx(toy.plan.a[j]).epsilon(1e-15));
    for (double t : res.tau) CHECK(t == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(res.tau_norm == doctest::Approx(1.0).epsilon(1e-12));
    // a/b = 1, 1, 0.5 along decreasing delta; g1 is the running max from small delta
    CHECK(res.g1(0.0) == 0.0);
    CHECK(res.g1(0.125) == doctest::Approx(0.5));
    CHECK(res.g1(0.25) == doctest::Approx(1.0));
    CHECK(res.g1(0.5) == doctest::Approx(1.0));
    CHECK(res.g1.is_nondecreasing());

    // scaling by c: knots move to delta_n / c, tau and tau0 are unchanged, g(c delta) is preserved
    const double c = 2.0;
    const auto scaled = build_factorization(toy.ensemble(c), toy.space, toy.plan, OrliczFunction::power(2.0), toy.deltas);
    REQUIRE(scaled.active.size() == 3);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(scaled.knots.delta[scaled.active[j]] == doctest::Approx(toy.plan.a[j] / c).epsilon(1e-15));
    CHECK(scaled.tau == res.tau);
    CHECK(scaled.tau0 == res.tau0);
    CHECK(scaled.tau_norm == doctest::Approx(res.tau_norm).epsilon(1e-12));
    for (double d : {0.1, 0.2, 0.3, 0.4}) CHECK(scaled.g(d / c) == doctest::Approx(res.g(d)).epsilon(1e-12));
    // theta itself scales by c
    for (std::size_t k = 0; k < toy.deltas.size(); ++k)
        CHECK(scaled.theta.knots()[k].y == doctest::Approx(c * res.theta.knots()[k].y).epsilon(1e-12));
}

TEST_CASE("degenerate inputs are rejected") {
    const LinearToy toy;
    const auto zero = toy.ensemble(0.0);
    CHECK_THROWS_AS(build_factorization(zero, toy.space, toy.plan, OrliczFunction::power(2.0), toy.deltas), DegenerateField);
    // all a_n above theta(diam): no usable knots
    const auto big = SequencePlan::from_sequences({8.0, 4.0, 2.0}, {0.5, 0.25, 0.25});
    CHECK_THROWS_AS(build_factorization(toy.ensemble(1.0), toy.space, big, OrliczFunction::power(2.0), toy.deltas), InvalidInput);
}

TEST_CASE("brownian factorization holds pathwise and generalizes to fresh paths") {
    const double tmax = std::exp(-1.0);
    const auto grid = linspace(0.0, tmax, 513);
    const auto space = DiscreteMetricSpace::line(grid);
    const auto deltas = default_delta_grid(space, 48);
    const auto plan = default_sequences();
    const auto ens = simulate_brownian(grid, 3000, 1);
    const auto res = build_factorization(ens, space, plan, OrliczFunction::power(2.0), deltas);
    CHECK(res.active.size() >= 3);

    const auto oracle = tau_oracle(res);
    for (std::size_t r = 0; r < res.realizations; ++r) CHECK(res.tau[r] == doctest::Approx(oracle[r]).epsilon(1e-13));
    const auto audit = audit_pathwise(res, res.knot_moduli, res.tau);
    CHECK(audit.violating == 0);
    CHECK(audit.worst_ratio <= 1.0 + 1e-12);
    CHECK(res.tau_norm <= 1.02);
    CHECK(res.tau0_norm == doctest::Approx(1.0).epsilon(1e-9));
    for (double t : res.tau) CHECK(t >= 0.0);
    CHECK(res.g(0.0) == 0.0);
    CHECK(res.g.is_nondecreasing());
    // knots invert the monotone theta fit
    for (auto n : res.active) CHECK(res.knots.theta_fit(res.knots.delta[n]) == doctest::Approx(plan.a[n]).epsilon(1e-9));

    // fresh seed: tau recomputed per path keeps the identity
    const auto fresh = simulate_brownian(grid, 2000, 2);
    std::vector<double> kd;
    for (auto n : res.active) kd.push_back(res.knots.delta[n]);
    const auto fm = modulus_samples(fresh, space, kd);
    const auto ftau = tau_series(res, fm);
    CHECK(audit_pathwise(res, fm.values, ftau).violating == 0);

    // the scaling function is stable across seeds up to MC noise in theta
    const auto again = build_factorization(fresh, space, plan, OrliczFunction::power(2.0), deltas);
    CHECK(again.tau_norm == doctest::Approx(res.tau_norm).epsilon(0.05));
    for (double d : logspace(0.01, 0.3, 8)) CHECK(again.g(d) == doctest::Approx(res.g(d)).epsilon(0.1));
}

TEST_CASE("weaker-norm factorization") {
    const auto grid = linspace(0.0, 1.0, 129);
    const auto space = DiscreteMetricSpace::line(grid);
    const auto ens = simulate_brownian(grid, 2000, 3);
    const auto deltas = default_delta_grid(space, 32);
    const auto plan = default_sequences();
    const auto res = weaker_norm_factorization(ens, space, OrliczFunction::gaussian(), OrliczFunction::exp_power(1.0),
                                               plan, deltas);
    // independent check of ||tau0||_{Theta_1} = 1: mean(exp|tau0| - 1) = 1
    double m = 0.0;
    for (double t : res.tau0) m += std::expm1(std::abs(t));
    CHECK(m / double(res.tau0.size()) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(audit_pathwise(res, res.knot_moduli, res.tau).violating == 0);
    CHECK_THROWS_AS(weaker_norm_factorization(ens, space, OrliczFunction::gaussian(), OrliczFunction::gaussian(), plan, deltas),
                    InvalidInput);
    const auto zero = testing::sign_times(4, grid, [](double) { return 0.0; });
    CHECK_THROWS(weaker_norm_factorization(zero, space, OrliczFunction::gaussian(), OrliczFunction::exp_power(1.0), plan, deltas));
}

TEST_CASE("heavy-tail factorization") {
    const auto grid = linspace(0.0, 1.0, 129);
    const auto space = DiscreteMetricSpace::line(grid);
    const auto ens = simulate_brownian(grid, 1000, 4);
    const auto deltas = default_delta_grid(space, 32);
    const auto plan = default_sequences();
    const auto ht = heavy_tail_factorization(ens, space, 1.0, plan, OrliczFunction::power(2.0), deltas);
    const auto direct = build_factorization(apply_zm(ens, 1.0), space, plan, OrliczFunction::power(2.0), deltas);
    CHECK(ht.tag == "modified (weak) factorable modulus");
    CHECK(ht.tau == direct.tau);
    CHECK(ht.knots.delta == direct.knots.delta);
    const auto zero = testing::sign_times(4, grid, [](double) { return 0.0; });
    CHECK_THROWS_AS(heavy_tail_factorization(zero, space, 1.0, plan, OrliczFunction::power(2.0), deltas), DegenerateField);
    CHECK_THROWS_AS(heavy_tail_factorization(ens, space, 0.0, plan, OrliczFunction::power(2.0), deltas), InvalidInput);
}

TEST_CASE("moment blow-up diagnostic") {
    // rows with |values| growing with the row index: estimates increase
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < 1000; ++r) rows.push_back({double(r * r), 1.0});
    const auto grow = testing::ensemble_from_rows(rows);
    const std::vector<std::size_t> levels{10, 100, 1000};
    CHECK(moment_blowup_diagnostic(grow, 4.0, levels).fired);
    std::vector<std::vector<double>> flat(1000, {1.0, -1.0});
    CHECK_FALSE(moment_blowup_diagnostic(testing::ensemble_from_rows(flat), 4.0, levels).fired);
}

TEST_CASE("rectangle factorization on a product field") {
    const std::vector<std::vector<double>> axes{linspace(0.0, 1.0, 17), linspace(0.0, 1.0, 17)};
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < 6; ++r) {
        std::vector<double> v;
        for (double x : axes[0])
            for (double y : axes[1]) v.push_back((r % 2 ? -1.0 : 1.0) * x * y);
        rows.push_back(v);
    }
    const auto ens = testing::ensemble_from_rows(rows, axes);
    const auto plan = SequencePlan::from_sequences({0.25, 0.0625, 0.015625}, {0.5, 0.3, 0.2});
    const std::vector<double> s{0.0, 0.0625, 0.125, 0.25, 0.5, 1.0};
    const auto res = rectangle_factorization(ens, plan, OrliczFunction::power(2.0), std::vector<double>{1.0, 1.0}, s);
    REQUIRE(res.active.size() == 3);
    CHECK(res.knots.delta[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(res.knots.delta[1] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(res.knots.delta[2] == doctest::Approx(0.125).epsilon(1e-14));
    for (double t : res.tau) CHECK(t == doctest::Approx(1.0).epsilon(1e-14));

    std::vector<std::vector<double>> zrows(4, std::vector<double>(289, 0.0));
    CHECK_THROWS_AS(rectangle_factorization(testing::ensemble_from_rows(zrows, axes), plan, OrliczFunction::power(2.0),
                                            std::vector<double>{1.0, 1.0}, s),
                    DegenerateField);
}

TEST_CASE("brownian sheet rectangle factorization holds pathwise") {
    const std::vector<std::vector<double>> axes{linspace(0.0, 1.0, 64), linspace(0.0, 1.0, 64)};
    const auto ens = simulate_brownian_sheet(axes, 2000, 6);
    const auto res = rectangle_factorization(ens, default_sequences(), OrliczFunction::power(2.0),
                                             std::vector<double>{1.0, 1.0}, linspace(0.0, 1.0, 24));
    const auto audit = audit_pathwise(res, res.knot_moduli, res.tau);
    CHECK(audit.realizations == 2000);
    CHECK(audit.violating == 0);
}

TEST_CASE("scaling slope and plan search") {
    const KnotFunction sq({{0.0, 0.0}, {0.01, 0.1}, {0.04, 0.2}, {0.09, 0.3}, {0.16, 0.4}});
    const KnotFunction lin({{0.0, 0.0}, {1.0, 3.0}});
    CHECK(scaling_slope(lin, 0.01, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(scaling_slope(sq, 0.01, 0.16) > 0.45);

    const auto grid = linspace(0.0, 1.0, 65);
    const auto space = DiscreteMetricSpace::line(grid);
    const auto ens = simulate_brownian(grid, 300, 9);
    const std::vector<double> nus{0.5, 1.0}, ths{0.5, 1.0};
    const auto best = search_plan(ens, space, OrliczFunction::power(2.0), default_delta_grid(space, 24), 0.1, nus, ths);
    CHECK(std::isfinite(best.g_at_reference));
    CHECK(best.g_at_reference > 0.0);
}
