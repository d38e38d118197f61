#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fcont/knots.hpp"

namespace fcont {

class FieldEnsemble;

enum class OrliczFamily { power, exp_power, gaussian, table };

/// Young-Orlicz function: even, convex, Phi(0) = 0, increasing to infinity
/// on the positive half line.
///
///   power      Phi(u) = |u|^p,             p >= 1
///   exp_power  Phi(u) = exp(|u|^p) - 1,    p >= 1
///   gaussian   Phi(u) = exp(u^2 / 2) - 1
///   table      piecewise linear through (0, 0) and user knots, extended
///              linearly with the last slope
///
/// The inverse is always computed by monotone bisection.
class OrliczFunction {
public:
    static OrliczFunction power(double p);
    static OrliczFunction exp_power(double p);
    static OrliczFunction gaussian();
    static OrliczFunction table(std::vector<Knot> knots);

    double operator()(double u) const;
    /// ln Phi(|u|); -inf at u = 0. Stays finite where Phi itself overflows.
    double log_value(double u) const;
    /// Smallest u >= 0 with Phi(u) >= v, to bisection precision.
    double inverse(double v) const;

    OrliczFamily family() const { return family_; }
    double param() const { return param_; }
    const std::vector<Knot>& table_knots() const { return knots_; }
    std::string name() const;

    /// Constant K of Phi(x)Phi(y) <= Phi(K(x+y)), when known.
    std::optional<double> nabla2() const { return nabla2_; }
    OrliczFunction with_nabla2(double K) const;

private:
    OrliczFamily family_ = OrliczFamily::power;
    double param_ = 2.0;
    std::vector<Knot> knots_;
    std::optional<double> nabla2_;
};

/// Generating function of a Grand Lebesgue norm, defined on [lower, upper].
/// Outside its support (or off the pin of a degenerate function) it is +inf.
class PsiFunction {
public:
    static PsiFunction constant(double c, double upper = std::numeric_limits<double>::infinity());
    /// psi(p) = scale * p^k on [1, upper].
    static PsiFunction power(double k, double scale = 1.0, double upper = std::numeric_limits<double>::infinity());
    /// psi_(r): 1 at p = r, +inf elsewhere.
    static PsiFunction degenerate(double r);
    /// Piecewise linear through (p, psi) knots; support is the knot range.
    static PsiFunction table(std::vector<Knot> knots);

    double operator()(double p) const;

    double lower() const { return lower_; }
    double upper() const { return upper_; }
    bool in_support(double p) const;
    bool is_degenerate() const { return pin_.has_value(); }
    std::optional<double> pin() const { return pin_; }
    /// Identically zero on its support (the natural function of a zero field).
    bool is_zero() const { return zero_; }
    std::string name() const;
    const std::vector<Knot>& table_knots() const { return knots_; }

private:
    enum class Kind { constant, power, degenerate, table };
    Kind kind_ = Kind::constant;
    double a_ = 1.0;  // constant value / power exponent
    double scale_ = 1.0;
    double lower_ = 1.0;
    double upper_ = std::numeric_limits<double>::infinity();
    std::optional<double> pin_;
    bool zero_ = false;
    std::vector<Knot> knots_;
};

struct GlsNorm {
    PsiFunction psi;
    std::vector<double> p_grid;
};

/// Either a Luxemburg norm in L(Phi) or a Grand Lebesgue norm G(psi).
using NormSpec = std::variant<OrliczFunction, GlsNorm>;

std::string describe(const NormSpec& norm);

/// Rejects empty or non-finite sample sets.
void validate_samples(std::span<const double> samples);

/// Empirical |zeta|_p = (mean |zeta_i|^p)^(1/p), scaled to avoid overflow.
double moment_norm(std::span<const double> samples, double p);

/// inf{k > 0 : mean Phi(|zeta_i| / k) <= 1}, bisection to relative 1e-13.
double luxemburg_norm(std::span<const double> samples, const OrliczFunction& phi);

/// sup over p_grid of |zeta|_p / psi(p). A degenerate psi_(r) yields |zeta|_r.
double grand_lebesgue_norm(std::span<const double> samples, const PsiFunction& psi, std::span<const double> p_grid);

double norm_of(std::span<const double> samples, const NormSpec& norm);

/// Natural function psi(p) = max over points of the empirical |xi(x)|_p,
/// tabulated on p_grid.
PsiFunction natural_psi(const FieldEnsemble& ensemble, std::span<const double> p_grid);

/// Default moment grid for GLS norms, starting at p = 2.
std::vector<double> default_p_grid(double lower = 2.0, double upper = 16.0, std::size_t n = 29);

struct RatioTrace {
    bool holds = false;
    /// The decision comes from finitely many probes of an asymptotic condition.
    bool heuristic = true;
    std::vector<Knot> trace;
};

/// Delta_2 heuristic: Phi(2u)/Phi(u) over u_grid; bounded when the ratio on
/// the upper half of the grid grows by at most `growth_tolerance`.
RatioTrace check_delta2(const OrliczFunction& phi, std::span<const double> u_grid, double growth_tolerance = 1.5);

/// Smallest K >= 1 with Phi(x)Phi(y) <= Phi(K(x+y)) for every probe pair, or
/// nullopt when the required K keeps growing with the probe range (or exceeds
/// k_cap).
std::optional<double> nabla2_constant(const OrliczFunction& phi, std::span<const std::pair<double, double>> pairs,
                                      double growth_tolerance = 1.5, double k_cap = 1e6);

/// C2 = Phi^{-1}(1) / (54 K^2).
double c2_constant(const OrliczFunction& phi, double K);

/// Discrete conjugate f*(lambda) = max_i (|lambda| p_i - f(p_i)), evaluated
/// through the lower convex hull of the knots.
KnotFunction legendre_transform(const KnotFunction& f, std::span<const double> lambda_grid);

/// v_*(w) = inf over z of (z w + ln psi(1/z)), z in (1/upper, 1/lower).
double v_star(const PsiFunction& psi, double w);

/// True when Psi(u v) / Phi(u) < threshold at the top of u_grid for every v.
RatioTrace is_weaker(const OrliczFunction& psi_fn, const OrliczFunction& phi_fn, std::span<const double> v_probe,
                     std::span<const double> u_grid, double threshold = 1e-6);

}  // namespace fcont
