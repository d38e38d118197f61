#include "fcont/suites.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fcont/bounds.hpp"
#include "fcont/error.hpp"
#include "fcont/factorize.hpp"
#include "fcont/io.hpp"
#include "fcont/modulus.hpp"

namespace fcont {

using nlohmann::json;

const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "PASS";
        case CheckStatus::fail: return "FAIL";
        case CheckStatus::skipped: return "SKIPPED";
    }
    return "?";
}

SuiteSizes SuiteSizes::reduced() {
    SuiteSizes s;
    s.factorization_points = 257;
    s.factorization_m = 1000;
    s.tails_points = 65;
    s.tails_m = 5000;
    s.entropy_points = 65;
    s.entropy_m = 500;
    s.kr_points = 33;
    s.kr_m = 1000;
    s.vfun_points = 17;
    s.vfun_m = 1000;
    s.heavy_points = 65;
    s.heavy_levels = {50, 200, 1000};
    return s;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"factorization", "wiener-tails", "entropy",    "kr",
                                                "v-functional",  "rectangle",    "heavy-tail", "transforms",
                                                "all"};
    return names;
}

bool is_suite(const std::string& name) {
    const auto& n = suite_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

namespace {

constexpr double kInvE = 0.36787944117144233;

std::string fmt(double v) { return format_double(v); }

CheckResult make(int criterion, std::string name, bool ok, std::string detail, json data = json::object()) {
    return {criterion, std::move(name), ok ? CheckStatus::pass : CheckStatus::fail, std::move(detail), std::move(data)};
}

CheckResult skip(int criterion, std::string name, const std::string& family, const std::string& needs) {
    return {criterion, std::move(name), CheckStatus::skipped,
            "generator \"" + family + "\" does not match this suite (needs " + needs + ")", json::object()};
}

CheckResult failed(int criterion, std::string name, const std::exception& e) {
    return {criterion, std::move(name), CheckStatus::fail, std::string("error: ") + e.what(), json::object()};
}

bool family_in(const std::string& f, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (f == a) return true;
    return false;
}

// Brownian-type ensemble on [0, 1/e] with the config's seed and generator
// family (brownian, or gaussian with its kernel).
FieldEnsemble line_ensemble(const ExperimentConfig& cfg, std::size_t points, std::size_t m, double t_max = kInvE) {
    GeneratorConfig g = cfg.generator;
    g.points = points;
    g.realizations = m;
    g.t_max = t_max;
    return generate(g);
}

// ---------------------------------------------------------------- criteria 1-4

std::vector<CheckResult> factorization_suite(const ExperimentConfig& cfg, const SuiteSizes& sz) {
    const char* names[] = {"pathwise factorization identity", "norm bound on tau", "normalisation of tau0",
                           "scaling-function slope"};
    std::vector<CheckResult> out;
    if (!family_in(cfg.generator.family, {"brownian"})) {
        for (int c = 1; c <= 4; ++c) out.push_back(skip(c, names[c - 1], cfg.generator.family, "brownian"));
        return out;
    }
    try {
        const auto ens = line_ensemble(cfg, sz.factorization_points, sz.factorization_m);
        const auto space = DiscreteMetricSpace::line(generator_grid(GeneratorConfig{
            .points = sz.factorization_points, .t_max = kInvE}));
        const auto grid = default_delta_grid(space, 48);
        const auto res = build_factorization(ens, space, default_sequences(1.0, 1.0, 40),
                                             OrliczFunction::power(2.0), grid);

        // tau recomputed term by term in reverse order, then the knot inequality
        const std::size_t J = res.active.size();
        std::size_t violating = 0;
        double worst = 0.0;
        for (std::size_t r = 0; r < res.realizations; ++r) {
            const auto row = res.moduli(r);
            double tau = 0.0;
            for (std::size_t j = J; j-- > 0;) tau += res.b_active[j] * row[j] / res.plan.a[res.active[j]];
            bool bad = false;
            for (std::size_t j = 0; j < J; ++j) {
                const double bound = tau * res.plan.a[res.active[j]] / res.b_active[j];
                if (row[j] > bound * (1.0 + 1e-12)) bad = true;
                if (bound > 0.0) worst = std::max(worst, row[j] / bound);
            }
            violating += bad;
        }
        json knots{{"active", J}, {"N", res.plan.size()}};
        out.push_back(make(1, names[0], violating == 0,
                           std::to_string(res.realizations - violating) + "/" + std::to_string(res.realizations) +
                               " realizations hold at all " + std::to_string(J) +
                               " unclamped knots; worst ratio " + fmt(worst),
                           {{"violating", violating}, {"worst_ratio", worst}, {"knots", knots}}));
        out.push_back(make(2, names[1], res.tau_norm <= 1.02, "||tau|| = " + fmt(res.tau_norm) + " (limit 1.02)",
                           {{"tau_norm", res.tau_norm}}));
        out.push_back(make(3, names[2], res.tau0_norm >= 0.98 && res.tau0_norm <= 1.02,
                           "||tau0|| = " + fmt(res.tau0_norm) + " (range [0.98, 1.02])",
                           {{"tau0_norm", res.tau0_norm}}));
        const double slope = scaling_slope(res.g, std::ldexp(1.0, -9), std::ldexp(1.0, -3));
        out.push_back(make(4, names[3], slope >= 0.15 && slope <= 0.60,
                           "log-log slope of g on [2^-9, 2^-3] = " + fmt(slope) + " (range [0.15, 0.60])" +
                               (res.ratio_monotone ? "" : "; a_n/b_n lifted to its running maximum"),
                           {{"slope", slope}, {"ratio_monotone", res.ratio_monotone}}));
    } catch (const std::exception& e) {
        for (int c = static_cast<int>(out.size()) + 1; c <= 4; ++c) out.push_back(failed(c, names[c - 1], e));
    }
    return out;
}

// ---------------------------------------------------------------- criterion 5

CheckResult tails_suite(const ExperimentConfig& cfg, const SuiteSizes& sz) {
    const char* name = "subgaussian tail of tau0";
    if (!family_in(cfg.generator.family, {"brownian", "gaussian"}))
        return skip(5, name, cfg.generator.family, "brownian or gaussian");
    try {
        const auto ens = line_ensemble(cfg, sz.tails_points, sz.tails_m);
        const auto space = DiscreteMetricSpace::line(generator_grid(GeneratorConfig{
            .points = sz.tails_points, .t_max = kInvE}));
        const auto res = build_factorization(ens, space, default_sequences(1.0, 1.0, 40), OrliczFunction::gaussian(),
                                             default_delta_grid(space, 48));
        const double us[] = {1.0, 1.5, 2.0, 2.5};
        const double M = static_cast<double>(res.tau0.size());
        bool bound_ok = true, decay_ok = true;
        std::ostringstream d;
        json rows = json::array();
        std::vector<double> logs;
        for (double u : us) {
            const double surv =
                static_cast<double>(std::count_if(res.tau0.begin(), res.tau0.end(), [u](double t) { return t > u; })) /
                M;
            const double ref = std::exp(-0.5 * u * u);
            const double limit = ref + 3.0 * std::sqrt(ref * (1.0 - ref) / M);
            bound_ok &= surv <= limit;
            logs.push_back(std::log(surv));
            d << "P(tau0>" << u << ")=" << fmt(surv) << " vs " << fmt(limit) << "; ";
            rows.push_back({{"u", u}, {"survival", surv}, {"limit", limit}});
        }
        for (std::size_t i = 1; i < logs.size(); ++i) {
            const double slope = (logs[i] - logs[i - 1]) / (us[i] - us[i - 1]);
            if (!(logs[i] < logs[i - 1]) || !(slope <= -us[i - 1])) decay_ok = false;
        }
        d << "log-survival decay " << (decay_ok ? "steeper than -u" : "NOT steeper than -u");
        return make(5, name, bound_ok && decay_ok, d.str(),
                    {{"rows", rows}, {"bound_ok", bound_ok}, {"decay_ok", decay_ok}, {"tau0_norm", res.tau0_norm}});
    } catch (const std::exception& e) {
        return failed(5, name, e);
    }
}

// ---------------------------------------------------------------- criterion 6

CheckResult entropy_suite(const ExperimentConfig& cfg, const SuiteSizes& sz) {
    const char* name = "entropy-integral dominance";
    if (!family_in(cfg.generator.family, {"brownian"})) return skip(6, name, cfg.generator.family, "brownian");
    try {
        const auto ens = line_ensemble(cfg, sz.entropy_points, sz.entropy_m);
        const auto psi = PsiFunction::degenerate(2.0);
        const std::vector<double> pg{2.0};
        const auto space = natural_distance(ens, psi, pg);
        const auto deltas = logspace(std::ldexp(1.0, -10), std::ldexp(1.0, -2), 20);
        const auto theta = theta_function(ens, space, deltas, GlsNorm{psi, pg});
        const auto bound = entropy_integral_bound(space, psi, deltas);
        bool ok = true;
        double min_margin = std::numeric_limits<double>::infinity();
        json rows = json::array();
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            const double emp = theta.knots()[i].y;
            ok &= bound[i] >= emp;
            min_margin = std::min(min_margin, bound[i] / std::max(emp, 1e-300));
            rows.push_back({{"delta", deltas[i]}, {"empirical", emp}, {"bound", bound[i]}});
        }
        return make(6, name, ok,
                    "bound >= empirical GLS modulus at " + std::string(ok ? "all" : "NOT all") +
                        " 20 deltas; smallest bound/empirical ratio " + fmt(min_margin),
                    {{"rows", rows}});
    } catch (const std::exception& e) {
        return failed(6, name, e);
    }
}

// ---------------------------------------------------------------- criterion 7

CheckResult kr_suite(const ExperimentConfig& cfg, const SuiteSizes& sz) {
    const char* name = "majorizing-measure empirical factor";
    if (!family_in(cfg.generator.family, {"brownian"})) return skip(7, name, cfg.generator.family, "brownian");
    try {
        const double p = 4.0, theta = 2.0;
        const auto ens = line_ensemble(cfg, sz.kr_points, sz.kr_m);
        const auto t = generator_grid(GeneratorConfig{.points = sz.kr_points, .t_max = kInvE});
        const std::size_t n = t.size();
        // d(s, t) = c sqrt|t - s| with c the largest empirical |increment|_p / sqrt|t - s|
        double c = 0.0;
        std::vector<double> inc(ens.realizations());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                for (std::size_t r = 0; r < inc.size(); ++r) inc[r] = ens(r, j) - ens(r, i);
                c = std::max(c, moment_norm(inc, p) / std::sqrt(t[j] - t[i]));
            }
        c *= 1.0 + 1e-12;
        std::vector<double> dist(n * n, 0.0);
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < n; ++i) {
            labels.push_back(std::to_string(i));
            for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = c * std::sqrt(std::abs(t[j] - t[i]));
        }
        const DiscreteMetricSpace space(std::move(labels), std::move(dist));
        const auto measure = DiscreteMeasure::uniform(n);
        const double C = regularity_constant(space, measure, theta);
        const auto kr = kr_factor_bound(ens, space, measure, p, theta, C);
        return make(7, name, kr.z_mean <= 1.05,
                    "mean Z = " + fmt(kr.z_mean) + " (limit 1.05); c = " + fmt(c) + ", C(theta) = " + fmt(C),
                    {{"z_mean", kr.z_mean}, {"c", c}, {"C_theta", C}, {"p", p}, {"theta_reg", theta}});
    } catch (const std::exception& e) {
        return failed(7, name, e);
    }
}

// ---------------------------------------------------------------- criterion 8

CheckResult vfun_suite(const ExperimentConfig& cfg, const SuiteSizes& sz) {
    const char* name = "V-functional self-consistency";
    if (!family_in(cfg.generator.family, {"brownian", "gaussian", "fbm"}))
        return skip(8, name, cfg.generator.family, "a Gaussian generator");
    try {
        const auto ens = line_ensemble(cfg, sz.vfun_points, sz.vfun_m);
        const auto phi = OrliczFunction::gaussian();
        const auto space = orlicz_distance(ens, phi);
        const double V = v_functional(ens, space, DiscreteMeasure::uniform(space.size()), phi);
        return make(8, name, V <= 1.05, "V(d_Phi) = " + fmt(V) + " (limit 1.05)", {{"V", V}});
    } catch (const std::exception& e) {
        return failed(8, name, e);
    }
}

// ---------------------------------------------------------------- criterion 9

CheckResult rectangle_suite(const ExperimentConfig& cfg) {
    const char* name = "rectangle operator oracle";
    try {
        std::mt19937_64 rng(cfg.generator.seed ^ 0x9e3779b97f4a7c15ULL);
        std::uniform_real_distribution<double> coef(-2.0, 2.0), pt(0.0, 1.0);
        // 5-point Gauss-Legendre on [-1, 1]: exact for degree <= 9 per axis
        const double gx[] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
        const double gw[] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                             0.2369268850561891};
        double worst_poly = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            double c[5][5] = {};
            for (int i = 0; i <= 4; ++i)
                for (int j = 0; i + j <= 4; ++j) c[i][j] = coef(rng);
            auto f = [&](std::span<const double> x) {
                double s = 0.0;
                for (int i = 0; i <= 4; ++i)
                    for (int j = 0; i + j <= 4; ++j) s += c[i][j] * std::pow(x[0], i) * std::pow(x[1], j);
                return s;
            };
            auto mixed = [&](double x, double y) {
                double s = 0.0;
                for (int i = 1; i <= 4; ++i)
                    for (int j = 1; i + j <= 4; ++j) s += c[i][j] * i * j * std::pow(x, i - 1) * std::pow(y, j - 1);
                return s;
            };
            const double x[] = {pt(rng), pt(rng)}, y[] = {pt(rng), pt(rng)};
            double quad = 0.0;
            const double hx = 0.5 * (y[0] - x[0]), hy = 0.5 * (y[1] - x[1]);
            for (int a = 0; a < 5; ++a)
                for (int b = 0; b < 5; ++b)
                    quad += gw[a] * gw[b] * mixed(x[0] + hx * (1 + gx[a]), x[1] + hy * (1 + gx[b]));
            quad *= hx * hy;
            worst_poly = std::max(worst_poly, std::abs(rectangle_difference(f, x, y) - quad));
        }
        // f = x1 x2 on the dyadic grid k/64
        const auto axis = linspace(0.0, 1.0, 65);
        const std::vector<std::vector<double>> axes{axis, axis};
        std::vector<double> vals(65 * 65);
        for (std::size_t i = 0; i < 65; ++i)
            for (std::size_t j = 0; j < 65; ++j) vals[i * 65 + j] = axis[i] * axis[j];
        std::uniform_int_distribution<int> k(0, 64);
        int exact = 0;
        for (int trial = 0; trial < 20; ++trial) {
            const double ab[] = {k(rng) / 64.0, k(rng) / 64.0};
            exact += rectangle_modulus(vals, axes, ab) == ab[0] * ab[1];
        }
        const bool ok = worst_poly <= 1e-8 && exact == 20;
        return make(9, name, ok,
                    "max |box difference - quadrature| = " + fmt(worst_poly) + " over 10 polynomials; Omega(x1 x2) = ab in " +
                        std::to_string(exact) + "/20 cases",
                    {{"worst_poly_error", worst_poly}, {"exact_cases", exact}});
    } catch (const std::exception& e) {
        return failed(9, name, e);
    }
}

// ---------------------------------------------------------------- criterion 10

CheckResult heavy_suite(const ExperimentConfig& cfg, const SuiteSizes& sz) {
    const char* name = "heavy-tail pipeline";
    if (!family_in(cfg.generator.family, {"stable"})) return skip(10, name, cfg.generator.family, "stable");
    try {
        const std::size_t M = sz.heavy_levels.back();
        const auto ens = line_ensemble(cfg, sz.heavy_points, M);
        const auto space = DiscreteMetricSpace::line(generator_grid(GeneratorConfig{
            .points = sz.heavy_points, .t_max = kInvE}));
        const auto raw = moment_blowup_diagnostic(ens, 4.0, sz.heavy_levels);
        const auto light = moment_blowup_diagnostic(apply_zm(ens, 1.0), 4.0, sz.heavy_levels);
        std::ostringstream d;
        d << "|eta|_4 estimates";
        for (double v : raw.estimates) d << " " << fmt(v);
        d << (raw.fired ? " (blow-up fired)" : " (blow-up NOT fired)") << "; |Z1(eta)|_4";
        for (double v : light.estimates) d << " " << fmt(v);
        json data{{"raw_estimates", raw.estimates}, {"transformed_estimates", light.estimates}, {"fired", raw.fired}};
        bool factor_ok = false;
        try {
            const auto res = heavy_tail_factorization(ens, space, 1.0, default_sequences(1.0, 1.0, 40),
                                                      OrliczFunction::power(2.0), default_delta_grid(space, 48));
            const auto audit = audit_pathwise(res, res.knot_moduli, res.tau);
            factor_ok = audit.violating == 0;
            d << "; transformed factorization " << (factor_ok ? "holds" : "FAILS") << " on " << audit.realizations
              << " paths at " << res.active.size() << " knots";
            data["violating"] = audit.violating;
            data["tag"] = res.tag;
        } catch (const std::exception& e) {
            d << "; transformed factorization rejected: " << e.what();
            data["error"] = e.what();
        }
        return make(10, name, raw.fired && factor_ok, d.str(), data);
    } catch (const std::exception& e) {
        return failed(10, name, e);
    }
}

// ---------------------------------------------------------------- criterion 11

CheckResult transforms_suite(const ExperimentConfig& cfg) {
    const char* name = "transform and convexity micro-suite";
    try {
        // biconjugation on the hull slopes of each test function
        struct Fn {
            double lo, hi;
            double (*f)(double);
        };
        const Fn fns[] = {{0.0, 3.0, [](double p) { return 0.5 * p * p; }},
                          {0.0, 2.0, [](double p) { return std::exp(p) - 1.0; }},
                          {0.0, 2.0, [](double p) { return 0.25 * p * p * p * p; }},
                          {1.0, 3.0, [](double p) { return p * std::log(p) + 1.0; }},
                          {0.0, 2.0, [](double p) { return std::cosh(p); }}};
        double worst_bi = 0.0;
        for (const auto& fn : fns) {
            const auto ps = linspace(fn.lo, fn.hi, 401);
            std::vector<Knot> ks;
            for (double p : ps) ks.push_back({p, fn.f(p)});
            std::vector<double> slopes;
            for (std::size_t i = 0; i + 1 < ks.size(); ++i)
                slopes.push_back((ks[i + 1].y - ks[i].y) / (ks[i + 1].x - ks[i].x));
            const auto conj = legendre_transform(KnotFunction(ks), slopes);
            const auto bi = legendre_transform(conj, ps);
            for (std::size_t i = 0; i < ps.size(); ++i)
                worst_bi = std::max(worst_bi, std::abs(bi.knots()[i].y - ks[i].y));
        }
        // halving inequality
        const OrliczFunction families[] = {OrliczFunction::power(1.0),     OrliczFunction::power(2.0),
                                           OrliczFunction::power(3.5),     OrliczFunction::exp_power(1.0),
                                           OrliczFunction::exp_power(2.0), OrliczFunction::gaussian(),
                                           OrliczFunction::table({{1.0, 1.0}, {2.0, 3.0}, {3.0, 7.0}})};
        std::mt19937_64 rng(cfg.generator.seed + 11);
        std::uniform_real_distribution<double> unif(0.0, 10.0);
        std::size_t halving_bad = 0;
        for (int i = 0; i < 1000; ++i) {
            const double u = unif(rng);
            for (const auto& phi : families)
                if (phi(u / 2.0) > phi(u) / 2.0 * (1.0 + 1e-15)) ++halving_bad;
        }
        // Luxemburg norm against |.|_p
        std::normal_distribution<double> gauss;
        std::vector<double> sample(2000);
        for (double& v : sample) v = gauss(rng);
        double worst_lux = 0.0;
        for (double p : {1.0, 1.5, 2.0, 3.0, 4.0}) {
            const double a = luxemburg_norm(sample, OrliczFunction::power(p)), b = moment_norm(sample, p);
            worst_lux = std::max(worst_lux, std::abs(a - b) / b);
        }
        // triangle inequality of d_N
        const auto audit = audit_triangle(extended_integer_space(64));
        const bool ok = worst_bi <= 1e-6 && halving_bad == 0 && worst_lux <= 1e-9 && audit.ok && audit.exhaustive;
        return make(11, name, ok,
                    "biconjugation error " + fmt(worst_bi) + "; halving violations " + std::to_string(halving_bad) +
                        "/7000; Luxemburg vs |.|_p relative error " + fmt(worst_lux) + "; d_N triangle " +
                        (audit.ok ? "holds" : "FAILS") + " on " + std::to_string(audit.triples_checked) + " triples",
                    {{"biconjugation", worst_bi},
                     {"halving_violations", halving_bad},
                     {"luxemburg_error", worst_lux},
                     {"triangle_ok", audit.ok}});
    } catch (const std::exception& e) {
        return failed(11, name, e);
    }
}

}  // namespace

std::vector<CheckResult> run_suite(const std::string& name, const ExperimentConfig& cfg, const SuiteSizes& sizes) {
    if (!is_suite(name)) throw InvalidInput("unknown suite \"" + name + "\"");
    std::vector<CheckResult> out;
    const bool all = name == "all";
    if (all || name == "factorization") {
        auto r = factorization_suite(cfg, sizes);
        out.insert(out.end(), r.begin(), r.end());
    }
    if (all || name == "wiener-tails") out.push_back(tails_suite(cfg, sizes));
    if (all || name == "entropy") out.push_back(entropy_suite(cfg, sizes));
    if (all || name == "kr") out.push_back(kr_suite(cfg, sizes));
    if (all || name == "v-functional") out.push_back(vfun_suite(cfg, sizes));
    if (all || name == "rectangle") out.push_back(rectangle_suite(cfg));
    if (all || name == "heavy-tail") out.push_back(heavy_suite(cfg, sizes));
    if (all || name == "transforms") out.push_back(transforms_suite(cfg));
    return out;
}

}  // namespace fcont
