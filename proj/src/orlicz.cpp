#include "fcont/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fcont/error.hpp"
#include "fcont/fields.hpp"

namespace fcont {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kBisectionCap = 200;

// ln(exp(x) - 1) without overflow for large x.
double log_expm1(double x) {
    if (x <= 0) return -kInf;
    if (x > 30.0) return x + std::log1p(-std::exp(-x));
    return std::log(std::expm1(x));
}

std::string fmt_num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- Orlicz

OrliczFunction OrliczFunction::power(double p) {
    require(std::isfinite(p) && p >= 1.0, "power Orlicz function needs p >= 1");
    OrliczFunction f;
    f.family_ = OrliczFamily::power;
    f.param_ = p;
    return f;
}

OrliczFunction OrliczFunction::exp_power(double p) {
    require(std::isfinite(p) && p >= 1.0, "exponential Orlicz function needs p >= 1 (convexity at the origin)");
    OrliczFunction f;
    f.family_ = OrliczFamily::exp_power;
    f.param_ = p;
    return f;
}

OrliczFunction OrliczFunction::gaussian() {
    OrliczFunction f;
    f.family_ = OrliczFamily::gaussian;
    f.param_ = 2.0;
    return f;
}

OrliczFunction OrliczFunction::table(std::vector<Knot> knots) {
    require(!knots.empty(), "table Orlicz function needs knots");
    std::sort(knots.begin(), knots.end(), [](const Knot& a, const Knot& b) { return a.x < b.x; });
    if (knots.front().x != 0.0) knots.insert(knots.begin(), Knot{0.0, 0.0});
    require(knots.front().y == 0.0, "table Orlicz function must vanish at 0");
    require(knots.size() >= 2, "table Orlicz function needs a positive knot");
    double prev_slope = 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        require(knots[i].x > knots[i - 1].x, "table abscissae must be distinct");
        require(knots[i].y > knots[i - 1].y, "table Orlicz function must be strictly increasing");
        const double slope = (knots[i].y - knots[i - 1].y) / (knots[i].x - knots[i - 1].x);
        require(slope >= prev_slope * (1.0 - 1e-12), "table Orlicz function must be convex");
        prev_slope = slope;
    }
    OrliczFunction f;
    f.family_ = OrliczFamily::table;
    f.param_ = 0.0;
    f.knots_ = std::move(knots);
    return f;
}

double OrliczFunction::operator()(double u) const {
    const double a = std::abs(u);
    switch (family_) {
        case OrliczFamily::power:
            return param_ == 2.0 ? a * a : std::pow(a, param_);
        case OrliczFamily::exp_power:
            return std::expm1(param_ == 1.0 ? a : std::pow(a, param_));
        case OrliczFamily::gaussian:
            return std::expm1(0.5 * a * a);
        case OrliczFamily::table: {
            const auto& k = knots_;
            if (a >= k.back().x) {
                const Knot& p = k[k.size() - 2];
                const Knot& q = k.back();
                return q.y + (a - q.x) * (q.y - p.y) / (q.x - p.x);
            }
            auto it = std::upper_bound(k.begin(), k.end(), a, [](double v, const Knot& kn) { return v < kn.x; });
            const Knot& hi = *it;
            const Knot& lo = *(it - 1);
            return lo.y + (a - lo.x) * (hi.y - lo.y) / (hi.x - lo.x);
        }
    }
    return kInf;
}

double OrliczFunction::log_value(double u) const {
    const double a = std::abs(u);
    if (a == 0.0) return -kInf;
    switch (family_) {
        case OrliczFamily::power:
            return param_ * std::log(a);
        case OrliczFamily::exp_power:
            return log_expm1(std::pow(a, param_));
        case OrliczFamily::gaussian:
            return log_expm1(0.5 * a * a);
        case OrliczFamily::table:
            return std::log((*this)(a));
    }
    return kInf;
}

double OrliczFunction::inverse(double v) const {
    require(!std::isnan(v), "cannot invert Phi at NaN");
    if (v <= 0.0) return 0.0;
    if (v == kInf) return kInf;
    const double target = std::log(v);
    double lo = 0.0, hi = 1.0;
    while (log_value(hi) < target) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < kBisectionCap; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (log_value(mid) >= target)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-12 * 1e-3 * hi) break;
    }
    return hi;
}

std::string OrliczFunction::name() const {
    switch (family_) {
        case OrliczFamily::power:
            return "power(" + fmt_num(param_) + ")";
        case OrliczFamily::exp_power:
            return "exp_power(" + fmt_num(param_) + ")";
        case OrliczFamily::gaussian:
            return "gaussian";
        case OrliczFamily::table:
            return "table(" + std::to_string(knots_.size()) + " knots)";
    }
    return "?";
}

OrliczFunction OrliczFunction::with_nabla2(double K) const {
    require(std::isfinite(K) && K >= 1.0, "nabla2 constant must be >= 1");
    OrliczFunction f = *this;
    f.nabla2_ = K;
    return f;
}

// ---------------------------------------------------------------- psi

PsiFunction PsiFunction::constant(double c, double upper) {
    require(std::isfinite(c) && c >= 0.0, "constant psi needs a finite non-negative value");
    require(upper > 1.0, "psi support must extend beyond 1");
    PsiFunction f;
    f.kind_ = Kind::constant;
    f.a_ = c;
    f.upper_ = upper;
    f.zero_ = c == 0.0;
    return f;
}

PsiFunction PsiFunction::power(double k, double scale, double upper) {
    require(std::isfinite(k) && k >= 0.0, "power psi needs a non-negative exponent");
    require(std::isfinite(scale) && scale > 0.0, "power psi needs a positive scale");
    require(upper > 1.0, "psi support must extend beyond 1");
    PsiFunction f;
    f.kind_ = Kind::power;
    f.a_ = k;
    f.scale_ = scale;
    f.upper_ = upper;
    return f;
}

PsiFunction PsiFunction::degenerate(double r) {
    require(std::isfinite(r) && r >= 1.0, "degenerate psi needs a finite order r >= 1");
    PsiFunction f;
    f.kind_ = Kind::degenerate;
    f.pin_ = r;
    f.lower_ = r;
    f.upper_ = r;
    return f;
}

PsiFunction PsiFunction::table(std::vector<Knot> knots) {
    require(!knots.empty(), "table psi needs knots");
    std::sort(knots.begin(), knots.end(), [](const Knot& a, const Knot& b) { return a.x < b.x; });
    bool all_zero = true;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        require(std::isfinite(knots[i].x) && knots[i].x >= 1.0, "psi knots need p >= 1");
        require(std::isfinite(knots[i].y) && knots[i].y >= 0.0, "psi values must be finite and non-negative");
        if (i > 0) require(knots[i].x > knots[i - 1].x, "psi knot abscissae must be distinct");
        if (knots[i].y != 0.0) all_zero = false;
    }
    PsiFunction f;
    f.kind_ = Kind::table;
    f.lower_ = knots.front().x;
    f.upper_ = knots.back().x;
    f.zero_ = all_zero;
    f.knots_ = std::move(knots);
    return f;
}

bool PsiFunction::in_support(double p) const {
    if (pin_) return p == *pin_;
    return p >= lower_ && p <= upper_;
}

double PsiFunction::operator()(double p) const {
    if (!in_support(p)) return kInf;
    switch (kind_) {
        case Kind::constant:
            return a_;
        case Kind::power:
            return scale_ * std::pow(p, a_);
        case Kind::degenerate:
            return 1.0;
        case Kind::table: {
            if (knots_.size() == 1) return knots_.front().y;
            if (p >= knots_.back().x) return knots_.back().y;
            auto it = std::upper_bound(knots_.begin(), knots_.end(), p,
                                       [](double v, const Knot& k) { return v < k.x; });
            const Knot& hi = *it;
            const Knot& lo = *(it - 1);
            return lo.y + (p - lo.x) * (hi.y - lo.y) / (hi.x - lo.x);
        }
    }
    return kInf;
}

std::string PsiFunction::name() const {
    switch (kind_) {
        case Kind::constant:
            return "constant(" + fmt_num(a_) + ")";
        case Kind::power:
            return "power(" + fmt_num(a_) + ")";
        case Kind::degenerate:
            return "degenerate(" + fmt_num(*pin_) + ")";
        case Kind::table:
            return "table(" + std::to_string(knots_.size()) + " knots)";
    }
    return "?";
}

std::string describe(const NormSpec& norm) {
    if (const auto* phi = std::get_if<OrliczFunction>(&norm)) return "luxemburg:" + phi->name();
    return "gls:" + std::get<GlsNorm>(norm).psi.name();
}

// ---------------------------------------------------------------- norms

void validate_samples(std::span<const double> samples) {
    require(!samples.empty(), "sample set must be non-empty");
    for (double v : samples) require(std::isfinite(v), "sample set contains a non-finite value");
}

double moment_norm(std::span<const double> samples, double p) {
    validate_samples(samples);
    require(p > 0.0 && std::isfinite(p), "moment order must be positive and finite");
    double top = 0.0;
    for (double v : samples) top = std::max(top, std::abs(v));
    if (top == 0.0) return 0.0;
    double acc = 0.0;
    if (p == 2.0) {
        for (double v : samples) {
            const double t = v / top;
            acc += t * t;
        }
    } else {
        for (double v : samples) acc += std::pow(std::abs(v) / top, p);
    }
    return top * std::pow(acc / static_cast<double>(samples.size()), 1.0 / p);
}

double luxemburg_norm(std::span<const double> samples, const OrliczFunction& phi) {
    validate_samples(samples);
    double top = 0.0;
    for (double v : samples) top = std::max(top, std::abs(v));
    if (top == 0.0) return 0.0;
    const double n = static_cast<double>(samples.size());

    // mean Phi(|zeta| / k); the power family reduces to one pass
    double power_sum = 0.0;
    const bool is_power = phi.family() == OrliczFamily::power;
    if (is_power)
        for (double v : samples) power_sum += std::pow(std::abs(v) / top, phi.param());
    auto mean_phi = [&](double k) {
        if (is_power) return power_sum * std::pow(top / k, phi.param()) / n;
        double acc = 0.0;
        for (double v : samples) {
            acc += phi(v / k);
            if (acc == kInf) return kInf;
        }
        return acc / n;
    };

    // mean >= Phi(top / k) / n and mean <= Phi(top / k) bracket the root
    double lo = top / phi.inverse(n);
    double hi = top / phi.inverse(1.0);
    while (mean_phi(hi) > 1.0) hi *= 1.0 + 1e-14;
    while (mean_phi(lo) <= 1.0 && lo > 0.0) lo *= 0.5;
    for (int i = 0; i < kBisectionCap && hi - lo > 1e-13 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mean_phi(mid) <= 1.0)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double grand_lebesgue_norm(std::span<const double> samples, const PsiFunction& psi, std::span<const double> p_grid) {
    validate_samples(samples);
    if (psi.is_zero()) throw DegenerateField("psi is identically zero; the GLS norm is undefined");
    if (psi.is_degenerate()) return moment_norm(samples, *psi.pin());
    require(!p_grid.empty(), "GLS norm needs a non-empty p-grid");
    double best = 0.0;
    for (double p : p_grid) {
        require(psi.in_support(p), "p-grid point " + fmt_num(p) + " lies outside the support of psi");
        const double w = psi(p);
        if (w == 0.0) throw DegenerateField("psi vanishes at p = " + fmt_num(p));
        best = std::max(best, moment_norm(samples, p) / w);
    }
    return best;
}

double norm_of(std::span<const double> samples, const NormSpec& norm) {
    if (const auto* phi = std::get_if<OrliczFunction>(&norm)) return luxemburg_norm(samples, *phi);
    const auto& gls = std::get<GlsNorm>(norm);
    return grand_lebesgue_norm(samples, gls.psi, gls.p_grid);
}

PsiFunction natural_psi(const FieldEnsemble& ensemble, std::span<const double> p_grid) {
    require(ensemble.realizations() >= 1 && ensemble.points() >= 1, "natural psi needs a non-empty ensemble");
    require(!p_grid.empty(), "natural psi needs a non-empty p-grid");
    std::vector<Knot> knots;
    knots.reserve(p_grid.size());
    for (double p : p_grid) knots.push_back({p, 0.0});
    for (std::size_t x = 0; x < ensemble.points(); ++x) {
        const auto col = ensemble.column(x);
        for (auto& k : knots) k.y = std::max(k.y, moment_norm(col, k.x));
    }
    return PsiFunction::table(std::move(knots));
}

std::vector<double> default_p_grid(double lower, double upper, std::size_t n) {
    require(lower >= 1.0 && upper >= lower && n >= 1, "invalid p-grid bounds");
    return linspace(lower, upper, n);
}

// ---------------------------------------------------------------- growth conditions

RatioTrace check_delta2(const OrliczFunction& phi, std::span<const double> u_grid, double growth_tolerance) {
    require(!u_grid.empty(), "Delta_2 check needs a probe grid");
    RatioTrace out;
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        require(u_grid[i] > 0 && (i == 0 || u_grid[i] > u_grid[i - 1]), "u-grid must be positive and increasing");
        const double u = u_grid[i];
        out.trace.push_back({u, std::exp(phi.log_value(2.0 * u) - phi.log_value(u))});
    }
    const std::size_t start = out.trace.size() / 2;
    const double base = out.trace[start].y;
    double top = base;
    for (std::size_t i = start; i < out.trace.size(); ++i) top = std::max(top, out.trace[i].y);
    out.holds = std::isfinite(top) && top <= growth_tolerance * base;
    return out;
}

std::optional<double> nabla2_constant(const OrliczFunction& phi, std::span<const std::pair<double, double>> pairs,
                                      double growth_tolerance, double k_cap) {
    double range = 0.0;
    for (const auto& [x, y] : pairs) {
        require(x >= 0 && y >= 0 && std::isfinite(x) && std::isfinite(y), "nabla2 probes must be non-negative");
        range = std::max({range, x, y});
    }
    auto required = [&](double x, double y) {
        if (x == 0.0 || y == 0.0) return 0.0;  // Phi(0) = 0 on the left side
        const double log_prod = phi.log_value(x) + phi.log_value(y);
        // Phi^{-1}(exp(log_prod)) by bisection on log Phi
        double lo = 0.0, hi = 1.0;
        while (phi.log_value(hi) < log_prod) {
            lo = hi;
            hi *= 2.0;
        }
        for (int i = 0; i < kBisectionCap; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (phi.log_value(mid) >= log_prod)
                hi = mid;
            else
                lo = mid;
        }
        return hi / (x + y);
    };
    double k_all = 0.0, k_half = 0.0;
    bool have_half = false;
    for (const auto& [x, y] : pairs) {
        if (x + y == 0.0) continue;
        const double k = required(x, y);
        k_all = std::max(k_all, k);
        if (std::max(x, y) <= 0.5 * range) {
            k_half = std::max(k_half, k);
            have_half = true;
        }
    }
    if (!std::isfinite(k_all) || k_all > k_cap) return std::nullopt;
    if (have_half && k_all > growth_tolerance * std::max(k_half, 1.0)) return std::nullopt;
    return std::max(1.0, k_all);
}

double c2_constant(const OrliczFunction& phi, double K) {
    require(std::isfinite(K) && K >= 1.0, "C2 needs K >= 1");
    return phi.inverse(1.0) / (54.0 * K * K);
}

RatioTrace is_weaker(const OrliczFunction& psi_fn, const OrliczFunction& phi_fn, std::span<const double> v_probe,
                     std::span<const double> u_grid, double threshold) {
    require(!v_probe.empty() && !u_grid.empty(), "weaker-than check needs probes");
    for (std::size_t i = 0; i < u_grid.size(); ++i)
        require(u_grid[i] > 0 && (i == 0 || u_grid[i] > u_grid[i - 1]), "u-grid must be positive and increasing");
    RatioTrace out;
    out.holds = true;
    const double u = u_grid.back();
    for (double v : v_probe) {
        require(v > 0, "v probes must be positive");
        const double ratio = std::exp(psi_fn.log_value(u * v) - phi_fn.log_value(u));
        out.trace.push_back({v, ratio});
        if (!(ratio < threshold)) out.holds = false;
    }
    return out;
}

// ---------------------------------------------------------------- transforms

KnotFunction legendre_transform(const KnotFunction& f, std::span<const double> lambda_grid) {
    require(!f.empty(), "Legendre transform needs a non-empty function");
    require(!lambda_grid.empty(), "Legendre transform needs a non-empty lambda grid");
    // lower convex hull of the knots (monotone chain)
    std::vector<Knot> hull;
    for (const Knot& k : f.knots()) {
        while (hull.size() >= 2) {
            const Knot& a = hull[hull.size() - 2];
            const Knot& b = hull.back();
            const double cross = (b.x - a.x) * (k.y - a.y) - (b.y - a.y) * (k.x - a.x);
            if (cross <= 0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(k);
    }
    std::vector<double> slopes(hull.size() > 1 ? hull.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < hull.size(); ++i)
        slopes[i] = (hull[i + 1].y - hull[i].y) / (hull[i + 1].x - hull[i].x);

    std::vector<Knot> out;
    out.reserve(lambda_grid.size());
    for (double lambda : lambda_grid) {
        const double s = std::abs(lambda);
        // s p - f(p) rises along the hull while the edge slope is below s
        const auto idx = static_cast<std::size_t>(
            std::partition_point(slopes.begin(), slopes.end(), [s](double sl) { return sl < s; }) - slopes.begin());
        out.push_back({lambda, s * hull[idx].x - hull[idx].y});
    }
    return KnotFunction(std::move(out));
}

double v_star(const PsiFunction& psi, double w) {
    require(std::isfinite(w), "v_* argument must be finite");
    if (psi.is_zero()) throw InvalidInput("psi vanishes; ln psi is undefined");
    if (psi.is_degenerate()) return w / *psi.pin();  // v is finite only at z = 1/r, where psi = 1

    const double z_hi = 1.0 / psi.lower();
    const double z_lo = std::isfinite(psi.upper()) ? 1.0 / psi.upper() : 1e-12;
    auto h = [&](double z) {
        const double val = psi(1.0 / z);
        if (val == 0.0) throw InvalidInput("psi vanishes at p = " + fmt_num(1.0 / z) + "; ln psi is undefined");
        return z * w + std::log(val);
    };
    if (z_lo >= z_hi) return h(z_hi);

    const auto grid = logspace(z_lo, z_hi, 2001);
    std::size_t best = 0;
    double best_val = kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = h(grid[i]);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    // golden-section refinement in the neighbouring cells
    double a = grid[best == 0 ? 0 : best - 1];
    double b = grid[std::min(best + 1, grid.size() - 1)];
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = h(c), fd = h(d);
    for (int i = 0; i < 100 && b - a > 1e-15 * b; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = h(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = h(d);
        }
    }
    return std::min({best_val, fc, fd});
}

}  // namespace fcont
