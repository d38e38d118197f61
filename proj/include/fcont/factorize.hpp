#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcont/fields.hpp"
#include "fcont/knots.hpp"
#include "fcont/metric.hpp"
#include "fcont/modulus.hpp"
#include "fcont/orlicz.hpp"

namespace fcont {

/// Sequences driving the construction: a_n strictly decreasing to 0 and
/// probability weights b_n, truncated at N = a.size().
struct SequencePlan {
    std::vector<double> a;
    std::vector<double> b;
    std::optional<double> nu;     // set when built by default_sequences
    std::optional<double> theta;  // ditto

    std::size_t size() const { return a.size(); }

    /// Validates: N >= 3, a positive strictly decreasing, b positive and
    /// summing to 1 (within 1e-12). The decay of a_n/b_n is not enforced;
    /// the default sequences at N = 40 reach only a_N/b_N ~ 0.7 a_1/b_1.
    static SequencePlan from_sequences(std::vector<double> a, std::vector<double> b);
};

/// b_n proportional to nu / (n ln^{1+nu}(n+1)) normalised over 1..N, and
/// a_n = n^{-1-theta}.
SequencePlan default_sequences(double nu = 1.0, double theta_param = 1.0, std::size_t N = 40);

enum class KnotStatus { ok, clamped, unsolvable };
const char* to_string(KnotStatus s);

struct KnotSolution {
    std::vector<double> delta;  // one per plan index; clamped entries sit at the domain end
    std::vector<KnotStatus> status;
    EmpiricalModulus theta_fit;  // isotonic fit that was inverted

    std::vector<std::size_t> usable() const;
};

/// Maximal solutions of theta(delta) = a_n on the monotone (isotonic) fit of
/// theta, interpolated linearly between grid points. a_n above theta at the
/// end of the domain is clamped; a_n below theta(front) has no solution.
KnotSolution solve_knots(const EmpiricalModulus& theta, const SequencePlan& plan);

struct FactorizationResult {
    std::string tag;
    std::string norm_name;
    SequencePlan plan;
    KnotSolution knots;
    std::vector<std::size_t> active;  // usable plan indices, delta decreasing
    std::vector<double> b_active;     // b renormalised over `active`
    EmpiricalModulus theta;           // raw empirical theta on the delta grid
    std::vector<double> theta_at_knots;  // exact empirical norm of Delta(xi, delta_n), per active index
    KnotFunction g1;                  // through (0,0) and (delta_n, running max of a_n/b_n)
    KnotFunction g;                   // tau_norm * g1
    std::vector<double> tau;
    std::vector<double> tau0;
    double tau_norm = 0.0;
    double tau0_norm = 0.0;
    /// Per-path moduli at the active knots: knot_moduli[r * active.size() + j].
    std::vector<double> knot_moduli;
    std::size_t realizations = 0;
    /// Audit of n -> a_n/b_n along the active knots; false when the raw
    /// ratios had to be lifted by a running maximum.
    bool ratio_monotone = true;

    double ratio(std::size_t j) const { return plan.a[active[j]] / b_active[j]; }
    std::span<const double> moduli(std::size_t r) const {
        return {knot_moduli.data() + r * active.size(), active.size()};
    }
};

/// Per-path moduli at arbitrary deltas: (r, k) -> values[r * deltas.size() + k].
using ModulusSampler = std::function<ModulusSamples(std::span<const double> deltas)>;

/// Shared construction: theta on `delta_grid` via `sampler`, knots, tau series,
/// scaling functions and normalisation in `norm`.
FactorizationResult factorize(const ModulusSampler& sampler, std::span<const double> delta_grid,
                              const SequencePlan& plan, const NormSpec& norm, std::string tag);

FactorizationResult build_factorization(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space,
                                        const SequencePlan& plan, const NormSpec& norm,
                                        std::span<const double> delta_grid);

struct WeakerNormOptions {
    std::vector<double> v_probe{0.5, 1.0, 2.0};
    std::vector<double> u_grid = logspace(1.0, 40.0, 64);
};

/// The construction with every norm taken in psi_weak, after checking
/// psi_weak << phi_strong and that the sup of |xi| has finite phi_strong norm.
FactorizationResult weaker_norm_factorization(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space,
                                              const OrliczFunction& phi_strong, const OrliczFunction& psi_weak,
                                              const SequencePlan& plan, std::span<const double> delta_grid,
                                              const WeakerNormOptions& opts = {});

/// Z_m applied elementwise, then the ordinary construction.
FactorizationResult heavy_tail_factorization(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space,
                                             double m, const SequencePlan& plan, const NormSpec& norm,
                                             std::span<const double> delta_grid);

/// Rectangle modulus Omega along delta_vec(s) = s * direction in place of
/// Delta; s_grid plays the role of the delta grid.
FactorizationResult rectangle_factorization(const FieldEnsemble& ensemble, const SequencePlan& plan,
                                            const NormSpec& norm, std::span<const double> direction,
                                            std::span<const double> s_grid);

/// tau(omega) = sum_j b_j Delta(omega, delta_j) / a_j for new paths, reusing
/// the knots and weights of `result`.
std::vector<double> tau_series(const FactorizationResult& result, const ModulusSamples& knot_moduli);

struct PathwiseAudit {
    std::size_t realizations = 0;
    std::size_t violating = 0;       // realizations failing at some active knot
    double worst_ratio = 0.0;        // max Delta / (tau a/b) over all checks
};

/// Delta(omega, delta_j) <= tau(omega) a_j / b_j (1 + rel_tol) at every
/// active knot.
PathwiseAudit audit_pathwise(const FactorizationResult& result, std::span<const double> knot_moduli,
                             std::span<const double> tau, double rel_tol = 1e-12);

/// Log-log least-squares slope of g over log-spaced points in [lo, hi].
double scaling_slope(const KnotFunction& g, double lo, double hi, std::size_t points = 25);

struct BlowupDiagnostic {
    std::vector<std::size_t> levels;
    std::vector<double> estimates;  // max over points of |xi(x)|_p on the first M rows
    bool fired = false;             // strictly increasing, last/first above `growth`
};

BlowupDiagnostic moment_blowup_diagnostic(const FieldEnsemble& ensemble, double p,
                                          std::span<const std::size_t> levels, double growth = 2.0);

/// Grid search over (nu, theta_param) minimising g at a reference delta.
/// Heuristic: it only compares candidates on the given ensemble.
struct PlanSearch {
    double nu = 1.0;
    double theta = 1.0;
    double g_at_reference = 0.0;
};
PlanSearch search_plan(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space, const NormSpec& norm,
                       std::span<const double> delta_grid, double reference_delta, std::span<const double> nu_grid,
                       std::span<const double> theta_grid, std::size_t N = 40);

}  // namespace fcont
