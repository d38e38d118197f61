#include <algorithm>
#include <cmath>

#include "fcont/bounds.hpp"
#include "fcont/error.hpp"

namespace fcont {

double entropy_integral_bound(const DiscreteMetricSpace& space, const PsiFunction& psi, double delta,
                              const EntropyOptions& opts) {
    const double d[] = {delta};
    return entropy_integral_bound(space, psi, d, opts).front();
}

std::vector<double> entropy_integral_bound(const DiscreteMetricSpace& space, const PsiFunction& psi,
                                           std::span<const double> deltas, const EntropyOptions& opts) {
    require(space.size() > 0, "entropy bound needs a non-empty space");
    require(!psi.is_zero(), "psi vanishes; the entropy integrand is undefined");
    require(opts.nodes >= 2, "need at least two quadrature nodes");
    double top = 0.0;
    for (double v : deltas) {
        require(std::isfinite(v) && v >= 0.0, "delta must be finite and non-negative");
        top = std::max(top, v);
    }
    auto integrand = [&](std::size_t covering) {
        const double v = std::exp(v_star(psi, std::log(2.0) + std::log(static_cast<double>(covering))));
        if (!std::isfinite(v)) throw InvalidInput("entropy integrand is not finite");
        return v;
    };

    // Below the smallest positive distance every closed ball is a twin class.
    const double dmin = space.min_positive_distance();
    const std::size_t n_small = dmin > 0.0 ? covering_number(space, {}, 0.5 * dmin).upper : 1;
    const double f0 = integrand(n_small);

    std::vector<double> out(deltas.size());
    if (!(dmin > 0.0) || top <= dmin) {
        for (std::size_t i = 0; i < deltas.size(); ++i) out[i] = 9.0 * f0 * deltas[i];
        return out;
    }

    std::vector<double> nodes = logspace(dmin, top, opts.nodes);
    for (double v : deltas)
        if (v > dmin) nodes.push_back(v);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    const auto profile = covering_profile(space, {}, nodes);

    // cumulative integral at each node, left-endpoint rule
    std::vector<double> cum(nodes.size());
    cum[0] = f0 * dmin;
    for (std::size_t i = 1; i < nodes.size(); ++i)
        cum[i] = cum[i - 1] + integrand(profile[i - 1].upper) * (nodes[i] - nodes[i - 1]);

    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const double v = deltas[i];
        if (v <= dmin) {
            out[i] = 9.0 * f0 * v;
            continue;
        }
        const auto k = static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), v) - nodes.begin());
        out[i] = 9.0 * cum[k];
    }
    return out;
}

}  // namespace fcont
