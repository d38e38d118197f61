#include "fcont/factorize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fcont/error.hpp"
#include "fcont/parallel.hpp"

namespace fcont {

SequencePlan SequencePlan::from_sequences(std::vector<double> a, std::vector<double> b) {
    require(a.size() >= 3, "plan needs at least 3 terms");
    require(a.size() == b.size(), "a and b must have the same length");
    double sum = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        require(std::isfinite(a[n]) && a[n] > 0.0, "a_n must be positive");
        require(std::isfinite(b[n]) && b[n] > 0.0, "b_n must be positive");
        if (n > 0) require(a[n] < a[n - 1], "a_n must be strictly decreasing");
        sum += b[n];
    }
    require(std::abs(sum - 1.0) <= 1e-12, "b_n must sum to 1");
    SequencePlan plan;
    plan.a = std::move(a);
    plan.b = std::move(b);
    return plan;
}

SequencePlan default_sequences(double nu, double theta_param, std::size_t N) {
    require(std::isfinite(nu) && nu > 0.0, "nu must be positive");
    require(std::isfinite(theta_param) && theta_param > 0.0, "theta must be positive");
    require(N >= 3, "N must be at least 3");
    std::vector<double> a(N), b(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double n = static_cast<double>(i + 1);
        a[i] = std::pow(n, -1.0 - theta_param);
        b[i] = nu / (n * std::pow(std::log(n + 1.0), 1.0 + nu));
    }
    const double sum = std::accumulate(b.begin(), b.end(), 0.0);
    for (double& v : b) v /= sum;
    SequencePlan plan;
    plan.a = std::move(a);
    plan.b = std::move(b);
    plan.nu = nu;
    plan.theta = theta_param;
    return plan;
}

const char* to_string(KnotStatus s) {
    switch (s) {
        case KnotStatus::ok: return "ok";
        case KnotStatus::clamped: return "clamped";
        case KnotStatus::unsolvable: return "unsolvable";
    }
    return "?";
}

std::vector<std::size_t> KnotSolution::usable() const {
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n < status.size(); ++n)
        if (status[n] == KnotStatus::ok) out.push_back(n);
    return out;
}

KnotSolution solve_knots(const EmpiricalModulus& theta, const SequencePlan& plan) {
    require(!theta.empty(), "theta has no knots");
    require(plan.size() > 0, "empty plan");
    const auto& tk = theta.knots();
    std::vector<double> y(tk.size());
    for (std::size_t i = 0; i < tk.size(); ++i) y[i] = tk[i].y;
    if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; }))
        throw DegenerateField("theta is identically zero: the field has no variation to factorize");
    const auto fit = isotonic_fit(y);
    std::vector<Knot> fk(tk.size());
    for (std::size_t i = 0; i < tk.size(); ++i) fk[i] = {tk[i].x, fit[i]};

    KnotSolution sol;
    sol.delta.resize(plan.size());
    sol.status.resize(plan.size());
    for (std::size_t n = 0; n < plan.size(); ++n) {
        const double a = plan.a[n];
        if (fit.back() < a) {
            sol.delta[n] = tk.back().x;
            sol.status[n] = KnotStatus::clamped;
            continue;
        }
        if (fit.front() > a) {
            sol.delta[n] = tk.front().x;
            sol.status[n] = KnotStatus::unsolvable;
            continue;
        }
        const auto i = static_cast<std::size_t>(std::upper_bound(fit.begin(), fit.end(), a) - fit.begin()) - 1;
        if (i + 1 == fit.size()) {
            sol.delta[n] = tk.back().x;
        } else {
            const double t = (a - fit[i]) / (fit[i + 1] - fit[i]);
            sol.delta[n] = tk[i].x + t * (tk[i + 1].x - tk[i].x);
        }
        sol.status[n] = KnotStatus::ok;
    }
    sol.theta_fit = EmpiricalModulus(std::move(fk));
    return sol;
}

namespace {

std::vector<double> column(const ModulusSamples& s, std::size_t k) { return s.at(k); }

}  // namespace

FactorizationResult factorize(const ModulusSampler& sampler, std::span<const double> delta_grid,
                              const SequencePlan& plan, const NormSpec& norm, std::string tag) {
    require(!delta_grid.empty(), "delta grid must be non-empty");
    for (std::size_t i = 0; i < delta_grid.size(); ++i) {
        require(delta_grid[i] >= 0.0 && std::isfinite(delta_grid[i]), "delta grid values must be non-negative");
        if (i > 0) require(delta_grid[i] > delta_grid[i - 1], "delta grid must be strictly increasing");
    }
    require(plan.size() >= 3 && plan.a.size() == plan.b.size(), "plan needs at least 3 terms");

    FactorizationResult res;
    res.tag = std::move(tag);
    res.norm_name = describe(norm);
    res.plan = plan;

    const ModulusSamples grid = sampler(delta_grid);
    require(grid.realizations >= 2, "factorization needs at least two realizations");
    res.realizations = grid.realizations;
    res.theta = theta_from_samples(grid, norm);
    res.knots = solve_knots(res.theta, plan);
    res.active = res.knots.usable();
    if (res.active.size() < 3) {
        std::size_t clamped = 0, unsolvable = 0;
        for (auto s : res.knots.status) {
            clamped += s == KnotStatus::clamped;
            unsolvable += s == KnotStatus::unsolvable;
        }
        std::ostringstream msg;
        msg << "only " << res.active.size() << " usable knots (need 3): " << clamped << " clamped, " << unsolvable
            << " below theta at the smallest delta; theta spans [" << res.knots.theta_fit.knots().front().y << ", "
            << res.knots.theta_fit.knots().back().y << "], a spans [" << plan.a.back() << ", " << plan.a.front()
            << "]";
        throw InvalidInput(msg.str());
    }

    const std::size_t J = res.active.size();
    double bsum = 0.0;
    for (auto n : res.active) bsum += plan.b[n];
    res.b_active.resize(J);
    std::vector<double> kd(J);
    for (std::size_t j = 0; j < J; ++j) {
        res.b_active[j] = plan.b[res.active[j]] / bsum;
        kd[j] = res.knots.delta[res.active[j]];
    }

    ModulusSamples at_knots = sampler(kd);
    res.theta_at_knots.resize(J);
    for (std::size_t j = 0; j < J; ++j) res.theta_at_knots[j] = norm_of(column(at_knots, j), norm);
    res.knot_moduli = std::move(at_knots.values);
    res.tau = tau_series(res, ModulusSamples{kd, res.realizations, res.knot_moduli});
    res.tau_norm = norm_of(res.tau, norm);
    if (!(res.tau_norm > 0.0))
        throw DegenerateField("the norm of tau is zero: every path is constant at the knot scales");

    // g1 through (delta_j, a_j/b_j), ascending in delta, lifted to a running
    // maximum where the ratio is not monotone along the knots
    std::vector<std::size_t> order(J);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) { return kd[p] < kd[q]; });
    std::vector<Knot> g1;
    if (kd[order.front()] > 0.0) g1.push_back({0.0, 0.0});
    double running = 0.0, prev_raw = -1.0;
    for (std::size_t j : order) {
        const double raw = res.ratio(j);
        if (raw <= prev_raw) res.ratio_monotone = false;
        prev_raw = raw;
        running = std::max(running, raw);
        if (!g1.empty() && g1.back().x == kd[j])
            g1.back().y = std::max(g1.back().y, running);
        else
            g1.push_back({kd[j], running});
    }
    std::vector<Knot> g = g1;
    for (auto& k : g) k.y *= res.tau_norm;
    res.g1 = KnotFunction(std::move(g1));
    res.g = KnotFunction(std::move(g));

    res.tau0.resize(res.tau.size());
    for (std::size_t r = 0; r < res.tau.size(); ++r) res.tau0[r] = res.tau[r] / res.tau_norm;
    res.tau0_norm = norm_of(res.tau0, norm);
    return res;
}

std::vector<double> tau_series(const FactorizationResult& result, const ModulusSamples& knot_moduli) {
    const std::size_t J = result.active.size();
    require(knot_moduli.deltas.size() == J, "moduli do not match the active knots");
    std::vector<double> tau(knot_moduli.realizations, 0.0);
    for (std::size_t r = 0; r < tau.size(); ++r) {
        const auto row = knot_moduli.path(r);
        double s = 0.0;
        for (std::size_t j = 0; j < J; ++j) s += result.b_active[j] * row[j] / result.plan.a[result.active[j]];
        tau[r] = s;
    }
    return tau;
}

PathwiseAudit audit_pathwise(const FactorizationResult& result, std::span<const double> knot_moduli,
                             std::span<const double> tau, double rel_tol) {
    const std::size_t J = result.active.size();
    require(knot_moduli.size() == tau.size() * J, "moduli do not match tau samples and active knots");
    PathwiseAudit audit;
    audit.realizations = tau.size();
    for (std::size_t r = 0; r < tau.size(); ++r) {
        bool bad = false;
        for (std::size_t j = 0; j < J; ++j) {
            const double delta = knot_moduli[r * J + j];
            const double bound = tau[r] * result.ratio(j);
            if (delta > bound * (1.0 + rel_tol)) bad = true;
            if (bound > 0.0)
                audit.worst_ratio = std::max(audit.worst_ratio, delta / bound);
            else if (delta > 0.0)
                audit.worst_ratio = std::numeric_limits<double>::infinity();
        }
        audit.violating += bad;
    }
    return audit;
}

FactorizationResult build_factorization(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space,
                                        const SequencePlan& plan, const NormSpec& norm,
                                        std::span<const double> delta_grid) {
    require(ensemble.points() == space.size(), "ensemble and space have different point counts");
    validate_delta_grid(delta_grid, space.diameter());
    const ModulusSampler sampler = [&](std::span<const double> d) { return modulus_samples(ensemble, space, d); };
    return factorize(sampler, delta_grid, plan, norm, "factorable modulus");
}

FactorizationResult weaker_norm_factorization(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space,
                                              const OrliczFunction& phi_strong, const OrliczFunction& psi_weak,
                                              const SequencePlan& plan, std::span<const double> delta_grid,
                                              const WeakerNormOptions& opts) {
    const auto weaker = is_weaker(psi_weak, phi_strong, opts.v_probe, opts.u_grid);
    require(weaker.holds, psi_weak.name() + " is not weaker than " + phi_strong.name() + " on the probe grid");
    std::vector<double> sups(ensemble.realizations());
    for (std::size_t r = 0; r < sups.size(); ++r) {
        double s = 0.0;
        for (double v : ensemble.row(r)) s = std::max(s, std::abs(v));
        sups[r] = s;
    }
    const double sup_norm = luxemburg_norm(sups, phi_strong);
    require(std::isfinite(sup_norm), "sup of the field has no finite norm under " + phi_strong.name());
    auto res = build_factorization(ensemble, space, plan, psi_weak, delta_grid);
    res.tag = "weaker-norm factorable modulus";
    return res;
}

FactorizationResult heavy_tail_factorization(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space,
                                             double m, const SequencePlan& plan, const NormSpec& norm,
                                             std::span<const double> delta_grid) {
    require(std::isfinite(m) && m > 0.0, "m must be positive");
    const FieldEnsemble transformed = apply_zm(ensemble, m);
    auto res = build_factorization(transformed, space, plan, norm, delta_grid);
    res.tag = "modified (weak) factorable modulus";
    return res;
}

FactorizationResult rectangle_factorization(const FieldEnsemble& ensemble, const SequencePlan& plan,
                                            const NormSpec& norm, std::span<const double> direction,
                                            std::span<const double> s_grid) {
    require(!ensemble.axes().empty(), "rectangle factorization needs a tensor-grid ensemble");
    require(direction.size() == ensemble.axes().size(), "direction dimension does not match the grid");
    const ModulusSampler sampler = [&](std::span<const double> s) {
        return rectangle_modulus_samples(ensemble, direction, s);
    };
    return factorize(sampler, s_grid, plan, norm, "rectangle factorable modulus");
}

double scaling_slope(const KnotFunction& g, double lo, double hi, std::size_t points) {
    require(lo > 0.0 && hi > lo && points >= 2, "slope range must satisfy 0 < lo < hi");
    const auto xs = logspace(lo, hi, points);
    std::vector<double> lx(points), ly(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double v = g(xs[i]);
        require(v > 0.0, "scaling function vanishes inside the slope range");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(v);
    }
    return least_squares_slope(lx, ly);
}

BlowupDiagnostic moment_blowup_diagnostic(const FieldEnsemble& ensemble, double p,
                                          std::span<const std::size_t> levels, double growth) {
    require(p >= 1.0, "moment order must be at least 1");
    require(!levels.empty(), "need at least one sample size");
    BlowupDiagnostic out;
    out.levels.assign(levels.begin(), levels.end());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        require(levels[i] >= 1 && levels[i] <= ensemble.realizations(), "sample size out of range");
        if (i > 0) require(levels[i] > levels[i - 1], "sample sizes must increase");
    }
    std::vector<double> col;
    for (std::size_t m : levels) {
        double best = 0.0;
        for (std::size_t x = 0; x < ensemble.points(); ++x) {
            col.resize(m);
            for (std::size_t r = 0; r < m; ++r) col[r] = ensemble(r, x);
            best = std::max(best, moment_norm(col, p));
        }
        out.estimates.push_back(best);
    }
    bool increasing = out.estimates.size() >= 2;
    for (std::size_t i = 1; i < out.estimates.size(); ++i) increasing &= out.estimates[i] > out.estimates[i - 1];
    out.fired = increasing && out.estimates.back() > growth * out.estimates.front();
    return out;
}

PlanSearch search_plan(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space, const NormSpec& norm,
                       std::span<const double> delta_grid, double reference_delta, std::span<const double> nu_grid,
                       std::span<const double> theta_grid, std::size_t N) {
    validate_delta_grid(delta_grid, space.diameter());
    const ModulusSamples grid = modulus_samples(ensemble, space, delta_grid);
    const std::vector<double> grid_deltas(delta_grid.begin(), delta_grid.end());
    const ModulusSampler sampler = [&](std::span<const double> d) {
        if (d.size() == grid_deltas.size() && std::equal(d.begin(), d.end(), grid_deltas.begin())) return grid;
        return modulus_samples(ensemble, space, d);
    };
    PlanSearch best;
    best.g_at_reference = std::numeric_limits<double>::infinity();
    for (double nu : nu_grid)
        for (double th : theta_grid) {
            try {
                const auto res = factorize(sampler, delta_grid, default_sequences(nu, th, N), norm, "search");
                const double v = res.g(reference_delta);
                if (v < best.g_at_reference) best = {nu, th, v};
            } catch (const InvalidInput&) {
                // too few usable knots for this candidate
            }
        }
    require(std::isfinite(best.g_at_reference), "no candidate plan produced a factorization");
    return best;
}

}  // namespace fcont
