#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fcont/fields.hpp"
#include "fcont/metric.hpp"
#include "fcont/orlicz.hpp"

namespace fcont {

// ---------------------------------------------------------------- entropy integral

struct EntropyOptions {
    std::size_t nodes = 512;  // log-spaced eps nodes between the smallest distance and delta
};

/// 9 * int_0^delta exp(v_*(ln 2 + H(eps))) d eps with H from the greedy
/// (upper) covering numbers.
///
/// The integrand is non-increasing in eps, so every cell is charged its left
/// endpoint value: the sum is an upper bound for the integral itself. Below
/// the smallest positive distance the covering number is constant and the
/// cell is exact.
double entropy_integral_bound(const DiscreteMetricSpace& space, const PsiFunction& psi, double delta,
                              const EntropyOptions& opts = {});
std::vector<double> entropy_integral_bound(const DiscreteMetricSpace& space, const PsiFunction& psi,
                                           std::span<const double> deltas, const EntropyOptions& opts = {});

// ---------------------------------------------------------------- majorizing measures

/// V = sum_{i,j} m_i m_j Phi(|f_i - f_j| / d_ij) for one realization. Pairs
/// at distance 0 with equal values contribute 0.
double v_functional(std::span<const double> values, const DiscreteMetricSpace& space, const DiscreteMeasure& measure,
                    const OrliczFunction& phi);
/// Mean of v_functional over realizations.
double v_functional(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space, const DiscreteMeasure& measure,
                    const OrliczFunction& phi);

/// w(x1, x2; V) = 6 int_0^{d} (Phi^{-1}[4V / m^2(B(r,x1))] + Phi^{-1}[4V / m^2(B(r,x2))]) dr,
/// integrated exactly over the steps of the ball masses. +inf when a ball has
/// zero mass on an interval of positive length.
double kr_w_distance(const DiscreteMetricSpace& space, const DiscreteMeasure& measure, std::size_t x1, std::size_t x2,
                     double V, const OrliczFunction& phi);

/// All pairwise w distances (row-major n x n), sharing the per-centre step
/// integrals.
std::vector<double> kr_w_matrix(const DiscreteMetricSpace& space, const DiscreteMeasure& measure, double V,
                                const OrliczFunction& phi);

/// Smallest C with m^2(B(r, x)) >= r^theta / C for all x and r in (0, 1].
double regularity_constant(const DiscreteMetricSpace& space, const DiscreteMeasure& measure, double theta);

struct KrFactorBound {
    double coefficient = 0.0;  // 12 4^{1/p} C^{1/p} / (1 - theta/p)
    double exponent = 0.0;     // 1 - theta/p
    double moment_excess = 0.0;  // max over pairs of |increment|_p / d - 1 (<= tol when the audit passes)
    std::vector<double> z;     // per-realization minimal Z
    double z_mean = 0.0;

    /// Right side of the pathwise bound for unit Z at distance d.
    double bound(double d) const;
};

/// Audits |xi(x1) - xi(x2)|_p <= d(x1, x2) on the ensemble (relative
/// tolerance `moment_tol`) and the ball-mass regularity with C_theta, then
/// computes Z(omega) = max over pairs of [|increment| / (coefficient d^exponent)]^p.
KrFactorBound kr_factor_bound(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space,
                              const DiscreteMeasure& measure, double p, double theta_reg, double C_theta,
                              double moment_tol = 1e-9);

struct KrModulusBound {
    double bound = 0.0;      // delta / C2
    double empirical = 0.0;  // || sup_{w <= delta} |xi(x1) - xi(x2)| ||_Phi, when an ensemble is given
};

/// Requires phi.nabla2(). w_matrix from kr_w_matrix on the same space.
KrModulusBound kr_modulus_bound(const OrliczFunction& phi, std::span<const double> w_matrix, double delta,
                                const FieldEnsemble* ensemble = nullptr);

}  // namespace fcont
