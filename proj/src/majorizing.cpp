#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fcont/bounds.hpp"
#include "fcont/error.hpp"
#include "fcont/parallel.hpp"

namespace fcont {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_measure(const DiscreteMetricSpace& space, const DiscreteMeasure& measure) {
    require(measure.size() == space.size(), "measure and space sizes differ");
}

// Distinct distances from x (s_0 = 0) and the closed-ball mass on [s_k, s_{k+1}).
struct BallSteps {
    std::vector<double> s;
    std::vector<double> mass;
};

BallSteps ball_steps(const DiscreteMetricSpace& space, const DiscreteMeasure& measure, std::size_t x) {
    std::vector<std::pair<double, double>> dw(space.size());
    for (std::size_t y = 0; y < space.size(); ++y) dw[y] = {space(x, y), measure[y]};
    std::sort(dw.begin(), dw.end());
    BallSteps out;
    double acc = 0.0;
    std::size_t i = 0;
    if (dw.front().first > 0.0) {
        out.s.push_back(0.0);
        out.mass.push_back(0.0);
    }
    while (i < dw.size()) {
        const double d = dw[i].first;
        while (i < dw.size() && dw[i].first == d) acc += dw[i++].second;
        out.s.push_back(d);
        out.mass.push_back(std::min(acc, 1.0));
    }
    return out;
}

// Cumulative integral of Phi^{-1}(4V / m^2(B(r, x))) over r from 0 to each step.
struct StepIntegral {
    BallSteps steps;
    std::vector<double> value;  // integrand on [s_k, s_{k+1})
    std::vector<double> cum;    // integral over [0, s_k]

    double at(double r) const {
        const auto k = static_cast<std::size_t>(std::upper_bound(steps.s.begin(), steps.s.end(), r) -
                                                steps.s.begin()) - 1;
        if (r == steps.s[k]) return cum[k];
        return value[k] == kInf ? kInf : cum[k] + value[k] * (r - steps.s[k]);
    }
};

StepIntegral step_integral(const DiscreteMetricSpace& space, const DiscreteMeasure& measure, std::size_t x, double V,
                           const OrliczFunction& phi) {
    StepIntegral si;
    si.steps = ball_steps(space, measure, x);
    const std::size_t K = si.steps.s.size();
    si.value.resize(K);
    si.cum.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double m = si.steps.mass[k];
        si.value[k] = V == 0.0 ? 0.0 : (m > 0.0 ? phi.inverse(4.0 * V / (m * m)) : kInf);
    }
    si.cum[0] = 0.0;
    for (std::size_t k = 1; k < K; ++k) {
        const double len = si.steps.s[k] - si.steps.s[k - 1];
        si.cum[k] = si.value[k - 1] == kInf ? kInf : si.cum[k - 1] + si.value[k - 1] * len;
    }
    return si;
}

}  // namespace

double v_functional(std::span<const double> values, const DiscreteMetricSpace& space, const DiscreteMeasure& measure,
                    const OrliczFunction& phi) {
    check_measure(space, measure);
    require(values.size() == space.size(), "realization does not match the space");
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (i == j) continue;
            const double diff = std::abs(values[i] - values[j]);
            if (diff == 0.0) continue;
            const double d = space(i, j);
            if (d == 0.0) {
                std::ostringstream msg;
                msg << "points " << i << " and " << j << " are at distance 0 but carry different values";
                throw InvalidInput(msg.str());
            }
            total += measure[i] * measure[j] * phi(diff / d);
        }
    return total;
}

double v_functional(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space, const DiscreteMeasure& measure,
                    const OrliczFunction& phi) {
    require(ensemble.points() == space.size(), "ensemble and space have different point counts");
    require(ensemble.realizations() > 0, "empty ensemble");
    std::vector<double> per(ensemble.realizations());
    parallel_for(per.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) per[r] = v_functional(ensemble.row(r), space, measure, phi);
    });
    double s = 0.0;
    for (double v : per) s += v;
    return s / static_cast<double>(per.size());
}

double kr_w_distance(const DiscreteMetricSpace& space, const DiscreteMeasure& measure, std::size_t x1, std::size_t x2,
                     double V, const OrliczFunction& phi) {
    check_measure(space, measure);
    require(x1 < space.size() && x2 < space.size(), "point index out of range");
    require(V >= 0.0 && std::isfinite(V), "V must be finite and non-negative");
    const double d = space(x1, x2);
    if (d == 0.0) return 0.0;
    const double i1 = step_integral(space, measure, x1, V, phi).at(d);
    const double i2 = step_integral(space, measure, x2, V, phi).at(d);
    return 6.0 * (i1 + i2);
}

std::vector<double> kr_w_matrix(const DiscreteMetricSpace& space, const DiscreteMeasure& measure, double V,
                                const OrliczFunction& phi) {
    check_measure(space, measure);
    require(V >= 0.0 && std::isfinite(V), "V must be finite and non-negative");
    const std::size_t n = space.size();
    std::vector<StepIntegral> per(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t x = begin; x < end; ++x) per[x] = step_integral(space, measure, x, V, phi);
    });
    std::vector<double> w(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = space(i, j);
            const double v = d == 0.0 ? 0.0 : 6.0 * (per[i].at(d) + per[j].at(d));
            w[i * n + j] = w[j * n + i] = v;
        }
    return w;
}

double regularity_constant(const DiscreteMetricSpace& space, const DiscreteMeasure& measure, double theta) {
    check_measure(space, measure);
    require(theta > 0.0 && std::isfinite(theta), "theta must be positive");
    double C = 0.0;
    for (std::size_t x = 0; x < space.size(); ++x) {
        const BallSteps st = ball_steps(space, measure, x);
        for (std::size_t k = 0; k < st.s.size() && st.s[k] < 1.0; ++k) {
            // sup over r in (s_k, s_{k+1}) of r^theta / m_k^2, approached at the right end
            const double r = k + 1 < st.s.size() ? std::min(st.s[k + 1], 1.0) : 1.0;
            if (st.mass[k] <= 0.0) return kInf;
            C = std::max(C, std::pow(r, theta) / (st.mass[k] * st.mass[k]));
        }
    }
    return C;
}

double KrFactorBound::bound(double d) const { return coefficient * std::pow(d, exponent); }

KrFactorBound kr_factor_bound(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space,
                              const DiscreteMeasure& measure, double p, double theta_reg, double C_theta,
                              double moment_tol) {
    require(ensemble.points() == space.size(), "ensemble and space have different point counts");
    require(theta_reg > 0.0 && p > theta_reg, "need p > theta > 0");
    require(C_theta > 0.0 && std::isfinite(C_theta), "C(theta) must be positive and finite");
    check_measure(space, measure);
    const std::size_t n = space.size(), M = ensemble.realizations();

    // moment condition on every pair
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::vector<double> excess(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> inc(M);
        for (std::size_t q = begin; q < end; ++q) {
            const auto [i, j] = pairs[q];
            for (std::size_t r = 0; r < M; ++r) inc[r] = ensemble(r, i) - ensemble(r, j);
            const double mom = moment_norm(inc, p);
            const double d = space(i, j);
            excess[q] = d > 0.0 ? mom / d - 1.0 : (mom > 0.0 ? kInf : -1.0);
        }
    });
    KrFactorBound out;
    const auto worst = std::max_element(excess.begin(), excess.end());
    out.moment_excess = worst == excess.end() ? -1.0 : *worst;
    if (out.moment_excess > moment_tol) {
        const auto [i, j] = pairs[static_cast<std::size_t>(worst - excess.begin())];
        std::ostringstream msg;
        msg << "moment condition fails at pair (" << i << ", " << j << "): |increment|_" << p << " exceeds d by "
            << out.moment_excess << " (relative)";
        throw InvalidInput(msg.str());
    }
    const double C_needed = regularity_constant(space, measure, theta_reg);
    if (C_needed > C_theta * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "ball-mass condition fails: theta = " << theta_reg << " needs C >= " << C_needed << ", given "
            << C_theta;
        throw InvalidInput(msg.str());
    }

    out.exponent = 1.0 - theta_reg / p;
    out.coefficient = 12.0 * std::pow(4.0, 1.0 / p) * std::pow(C_theta, 1.0 / p) / out.exponent;
    std::vector<double> scale(pairs.size());
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        const double d = space(pairs[q].first, pairs[q].second);
        scale[q] = d > 0.0 ? 1.0 / out.bound(d) : 0.0;
    }
    out.z.resize(M);
    parallel_for(M, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const auto row = ensemble.row(r);
            double best = 0.0;
            for (std::size_t q = 0; q < pairs.size(); ++q)
                best = std::max(best, std::abs(row[pairs[q].first] - row[pairs[q].second]) * scale[q]);
            out.z[r] = std::pow(best, p);
        }
    });
    double s = 0.0;
    for (double v : out.z) s += v;
    out.z_mean = s / static_cast<double>(M);
    return out;
}

KrModulusBound kr_modulus_bound(const OrliczFunction& phi, std::span<const double> w_matrix, double delta,
                                const FieldEnsemble* ensemble) {
    const auto K = phi.nabla2();
    if (!K) throw InvalidInput(phi.name() + " has no nabla_2 constant; the bound does not apply");
    require(delta >= 0.0 && std::isfinite(delta), "delta must be finite and non-negative");
    KrModulusBound out;
    out.bound = delta / c2_constant(phi, *K);
    if (!ensemble) return out;
    const std::size_t n = ensemble->points();
    require(w_matrix.size() == n * n, "w matrix does not match the ensemble");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (w_matrix[i * n + j] <= delta) pairs.emplace_back(i, j);
    std::vector<double> sup(ensemble->realizations(), 0.0);
    parallel_for(sup.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const auto row = ensemble->row(r);
            double best = 0.0;
            for (const auto& [i, j] : pairs) best = std::max(best, std::abs(row[i] - row[j]));
            sup[r] = best;
        }
    });
    out.empirical = luxemburg_norm(sup, phi);
    return out;
}

}  // namespace fcont
