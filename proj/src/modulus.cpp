#include "fcont/modulus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "fcont/fields.hpp"
#include "fcont/parallel.hpp"

namespace fcont {

// ---------------------------------------------------------------- ordinary modulus

ModulusEvaluator::ModulusEvaluator(const DiscreteMetricSpace& space) : n_(space.size()), line_(space.is_line()) {
    if (line_) {
        x_ = space.line_coords();
        return;
    }
    require(n_ < (std::size_t{1} << 32), "space too large for the pair sweep");
    pairs_.reserve(n_ * (n_ - 1) / 2);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j)
            pairs_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), space(i, j)});
    std::sort(pairs_.begin(), pairs_.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
}

std::vector<double> ModulusEvaluator::evaluate(std::span<const double> f, std::span<const double> deltas) const {
    std::vector<double> out(deltas.size());
    evaluate(f, deltas, out);
    return out;
}

void ModulusEvaluator::evaluate(std::span<const double> f, std::span<const double> deltas,
                                std::span<double> out) const {
    require(f.size() == n_, "realization does not match the space");
    require(out.size() == deltas.size(), "output size mismatch");
    if (line_)
        evaluate_line(f, deltas, out);
    else
        evaluate_pairs(f, deltas, out);
}

void ModulusEvaluator::evaluate_pairs(std::span<const double> f, std::span<const double> deltas,
                                      std::span<double> out) const {
    std::vector<std::size_t> order(deltas.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return deltas[a] < deltas[b]; });
    double running = 0.0;
    std::size_t p = 0;
    for (std::size_t k : order) {
        const double delta = deltas[k];
        for (; p < pairs_.size() && pairs_[p].d <= delta; ++p)
            running = std::max(running, std::abs(f[pairs_[p].i] - f[pairs_[p].j]));
        out[k] = running;
    }
}

void ModulusEvaluator::evaluate_line(std::span<const double> f, std::span<const double> deltas,
                                     std::span<double> out) const {
    const std::size_t n = n_;
    const auto levels = static_cast<std::size_t>(std::bit_width(n));
    thread_local std::vector<double> hi, lo;
    hi.resize(levels * n);
    lo.resize(levels * n);
    std::copy(f.begin(), f.end(), hi.begin());
    std::copy(f.begin(), f.end(), lo.begin());
    for (std::size_t k = 1; k < levels; ++k) {
        const std::size_t half = std::size_t{1} << (k - 1);
        const std::size_t span = std::size_t{1} << k;
        double* h = hi.data() + k * n;
        double* l = lo.data() + k * n;
        const double* hp = hi.data() + (k - 1) * n;
        const double* lp = lo.data() + (k - 1) * n;
        for (std::size_t i = 0; i + span <= n; ++i) {
            h[i] = std::max(hp[i], hp[i + half]);
            l[i] = std::min(lp[i], lp[i + half]);
        }
    }
    auto range = [&](std::size_t i, std::size_t j) {
        const std::size_t len = j - i + 1;
        const auto k = static_cast<std::size_t>(std::bit_width(len) - 1);
        const std::size_t j0 = j + 1 - (std::size_t{1} << k);
        const double* h = hi.data() + k * n;
        const double* l = lo.data() + k * n;
        return std::max(h[i], h[j0]) - std::min(l[i], l[j0]);
    };
    for (std::size_t q = 0; q < deltas.size(); ++q) {
        const double delta = deltas[q];
        double best = 0.0;
        std::size_t j = 0;
        std::size_t prev_j = n;  // sentinel: no previous window
        for (std::size_t i = 0; i < n; ++i) {
            if (j < i) j = i;
            while (j + 1 < n && x_[j + 1] - x_[i] <= delta) ++j;
            if (j == prev_j) continue;  // [i, j] lies inside the previous window
            prev_j = j;
            if (j > i) best = std::max(best, range(i, j));
            if (j + 1 == n) break;  // later windows are suffixes of this one
        }
        out[q] = best;
    }
}

std::vector<double> ModulusSamples::at(std::size_t k) const {
    std::vector<double> col(realizations);
    for (std::size_t r = 0; r < realizations; ++r) col[r] = values[r * deltas.size() + k];
    return col;
}

void validate_delta_grid(std::span<const double> deltas, double diameter) {
    require(!deltas.empty(), "delta grid must be non-empty");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        require(deltas[i] >= 0.0 && std::isfinite(deltas[i]), "delta grid values must be finite and non-negative");
        require(deltas[i] <= diameter * (1.0 + 1e-12), "delta grid must lie within [0, diam]");
        if (i > 0) require(deltas[i] > deltas[i - 1], "delta grid must be strictly increasing");
    }
}

std::vector<double> default_delta_grid(const DiscreteMetricSpace& space, std::size_t points) {
    std::vector<double> grid{0.0};
    // nudged up so every pair at the smallest gap is admitted despite rounding
    // in computed coordinate differences
    const double lo = std::min(space.min_positive_distance() * (1.0 + 1e-9), space.diameter());
    const double hi = space.diameter();
    if (hi <= 0.0) return grid;
    if (lo >= hi || points < 2) {
        grid.push_back(hi);
        return grid;
    }
    const auto tail = logspace(lo, hi, points);
    grid.insert(grid.end(), tail.begin(), tail.end());
    return grid;
}

EmpiricalModulus path_modulus(std::span<const double> values, const DiscreteMetricSpace& space,
                              std::span<const double> delta_grid) {
    validate_delta_grid(delta_grid, space.diameter());
    const ModulusEvaluator eval(space);
    const auto v = eval.evaluate(values, delta_grid);
    std::vector<Knot> knots(delta_grid.size());
    for (std::size_t k = 0; k < knots.size(); ++k) knots[k] = {delta_grid[k], v[k]};
    return EmpiricalModulus(std::move(knots));
}

ModulusSamples modulus_samples(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space,
                               std::span<const double> delta_grid) {
    require(ensemble.points() == space.size(), "ensemble and space have different point counts");
    require(!delta_grid.empty(), "delta grid must be non-empty");
    for (double d : delta_grid) require(d >= 0.0 && std::isfinite(d), "deltas must be finite and non-negative");
    const ModulusEvaluator eval(space);
    ModulusSamples out;
    out.deltas.assign(delta_grid.begin(), delta_grid.end());
    out.realizations = ensemble.realizations();
    out.values.resize(out.realizations * out.deltas.size());
    const std::size_t g = out.deltas.size();
    parallel_for(out.realizations, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r)
            eval.evaluate(ensemble.row(r), out.deltas, std::span<double>(out.values.data() + r * g, g));
    });
    return out;
}

EmpiricalModulus theta_from_samples(const ModulusSamples& samples, const NormSpec& norm) {
    std::vector<Knot> knots(samples.deltas.size());
    parallel_for(knots.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) knots[k] = {samples.deltas[k], norm_of(samples.at(k), norm)};
    });
    return EmpiricalModulus(std::move(knots));
}

EmpiricalModulus theta_function(const FieldEnsemble& ensemble, const DiscreteMetricSpace& space,
                                std::span<const double> delta_grid, const NormSpec& norm) {
    require(ensemble.realizations() >= 2, "theta needs at least two realizations");
    validate_delta_grid(delta_grid, space.diameter());
    return theta_from_samples(modulus_samples(ensemble, space, delta_grid), norm);
}

// ---------------------------------------------------------------- rectangles

namespace {

void check_axes(const std::vector<std::vector<double>>& axes) {
    require(!axes.empty() && axes.size() <= kMaxRectangleDim, "rectangle operators support 1 to 3 axes");
    for (const auto& a : axes) {
        require(!a.empty(), "grid axes must be non-empty");
        for (std::size_t i = 1; i < a.size(); ++i) require(a[i] > a[i - 1], "grid axes must be strictly increasing");
    }
}

}  // namespace

double rectangle_difference(std::span<const double> values, const std::vector<std::vector<double>>& axes,
                            std::span<const std::size_t> x, std::span<const std::size_t> y) {
    check_axes(axes);
    const std::size_t d = axes.size();
    require(x.size() == d && y.size() == d, "corner dimension does not match the grid");
    std::size_t n = 1;
    for (std::size_t k = 0; k < d; ++k) {
        require(x[k] < axes[k].size() && y[k] < axes[k].size(), "corner index out of range");
        n *= axes[k].size();
    }
    require(values.size() == n, "realization does not match the grid");
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
        std::size_t flat = 0;
        int from_x = 0;
        for (std::size_t k = 0; k < d; ++k) {
            const bool take_y = (mask >> k) & 1u;
            flat = flat * axes[k].size() + (take_y ? y[k] : x[k]);
            from_x += take_y ? 0 : 1;
        }
        total += (from_x % 2 == 0) ? values[flat] : -values[flat];
    }
    return total;
}

RectangleModulusEvaluator::RectangleModulusEvaluator(std::vector<std::vector<double>> axes) : axes_(std::move(axes)) {
    check_axes(axes_);
    for (const auto& ax : axes_) {
        shape_.push_back(ax.size());
        n_ *= ax.size();
        Axis level;
        std::vector<double> gaps{0.0};
        for (std::size_t a = 0; a < ax.size(); ++a)
            for (std::size_t b = a + 1; b < ax.size(); ++b) gaps.push_back(ax[b] - ax[a]);
        std::sort(gaps.begin(), gaps.end());
        gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());
        level.by_level.resize(gaps.size());
        for (std::size_t a = 0; a < ax.size(); ++a)
            for (std::size_t b = a + 1; b < ax.size(); ++b) {
                const auto l = static_cast<std::size_t>(
                    std::lower_bound(gaps.begin(), gaps.end(), ax[b] - ax[a]) - gaps.begin());
                level.by_level[l].push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)});
            }
        level.gaps = std::move(gaps);
        levels_.push_back(std::move(level));
    }
}

std::vector<double> RectangleModulusEvaluator::level_table(std::span<const double> f) const {
    const std::size_t d = axes_.size();
    std::vector<std::size_t> lsize(d);
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) {
        lsize[k] = levels_[k].gaps.size();
        total *= lsize[k];
    }
    std::vector<double> table(total, 0.0);
    if (d == 1) {
        for (std::size_t l = 0; l < lsize[0]; ++l)
            for (const AxisPair& p : levels_[0].by_level[l])
                table[l] = std::max(table[l], std::abs(f[p.b] - f[p.a]));
    } else if (d == 2) {
        const std::size_t n2 = shape_[1];
        for (std::size_t l1 = 0; l1 < lsize[0]; ++l1)
            for (const AxisPair& p1 : levels_[0].by_level[l1]) {
                const double* ra = f.data() + p1.a * n2;
                const double* rb = f.data() + p1.b * n2;
                double* trow = table.data() + l1 * lsize[1];
                for (std::size_t l2 = 0; l2 < lsize[1]; ++l2) {
                    double best = trow[l2];
                    for (const AxisPair& p2 : levels_[1].by_level[l2])
                        best = std::max(best, std::abs(rb[p2.b] - ra[p2.b] - rb[p2.a] + ra[p2.a]));
                    trow[l2] = best;
                }
            }
    } else {
        const std::size_t n2 = shape_[1], n3 = shape_[2];
        auto at = [&](std::size_t i, std::size_t j, std::size_t k) { return f[(i * n2 + j) * n3 + k]; };
        for (std::size_t l1 = 0; l1 < lsize[0]; ++l1)
            for (const AxisPair& p1 : levels_[0].by_level[l1])
                for (std::size_t l2 = 0; l2 < lsize[1]; ++l2)
                    for (const AxisPair& p2 : levels_[1].by_level[l2]) {
                        double* trow = table.data() + (l1 * lsize[1] + l2) * lsize[2];
                        for (std::size_t l3 = 0; l3 < lsize[2]; ++l3) {
                            double best = trow[l3];
                            for (const AxisPair& p3 : levels_[2].by_level[l3]) {
                                const double v = at(p1.b, p2.b, p3.b) - at(p1.a, p2.b, p3.b) - at(p1.b, p2.a, p3.b) -
                                                 at(p1.b, p2.b, p3.a) + at(p1.a, p2.a, p3.b) + at(p1.a, p2.b, p3.a) +
                                                 at(p1.b, p2.a, p3.a) - at(p1.a, p2.a, p3.a);
                                best = std::max(best, std::abs(v));
                            }
                            trow[l3] = best;
                        }
                    }
    }
    // running maximum along each axis: entry = sup over all smaller-or-equal gap levels
    std::size_t stride = 1;
    for (std::size_t k = d; k-- > 0;) {
        for (std::size_t idx = 0; idx < total; ++idx)
            if ((idx / stride) % lsize[k] > 0) table[idx] = std::max(table[idx], table[idx - stride]);
        stride *= lsize[k];
    }
    return table;
}

std::vector<double> RectangleModulusEvaluator::evaluate(std::span<const double> values,
                                                        const std::vector<std::vector<double>>& delta_vecs) const {
    require(values.size() == n_, "realization does not match the grid");
    const std::size_t d = axes_.size();
    for (const auto& dv : delta_vecs) {
        require(dv.size() == d, "delta vector dimension does not match the grid");
        for (double v : dv) require(v >= 0.0 && std::isfinite(v), "delta vector entries must be non-negative");
    }
    const auto table = level_table(values);
    std::vector<double> out;
    out.reserve(delta_vecs.size());
    for (const auto& dv : delta_vecs) {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < d; ++k) {
            const auto& g = levels_[k].gaps;
            const auto l = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), dv[k]) - g.begin()) - 1;
            flat = flat * g.size() + l;
        }
        out.push_back(table[flat]);
    }
    return out;
}

double rectangle_modulus(std::span<const double> values, const std::vector<std::vector<double>>& axes,
                         std::span<const double> delta_vec) {
    const RectangleModulusEvaluator eval(axes);
    return eval.evaluate(values, {std::vector<double>(delta_vec.begin(), delta_vec.end())}).front();
}

ModulusSamples rectangle_modulus_samples(const FieldEnsemble& ensemble, std::span<const double> direction,
                                         std::span<const double> s_grid) {
    require(!ensemble.axes().empty(), "rectangle modulus needs a tensor-grid ensemble");
    require(direction.size() == ensemble.axes().size(), "direction dimension does not match the grid");
    for (double v : direction) require(v >= 0.0 && std::isfinite(v), "direction entries must be non-negative");
    require(!s_grid.empty(), "path parameter grid must be non-empty");
    const RectangleModulusEvaluator eval(ensemble.axes());
    std::vector<std::vector<double>> dvecs;
    for (double s : s_grid) {
        require(s >= 0.0 && std::isfinite(s), "path parameters must be non-negative");
        std::vector<double> dv(direction.size());
        for (std::size_t k = 0; k < dv.size(); ++k) dv[k] = s * direction[k];
        dvecs.push_back(std::move(dv));
    }
    ModulusSamples out;
    out.deltas.assign(s_grid.begin(), s_grid.end());
    out.realizations = ensemble.realizations();
    out.values.resize(out.realizations * s_grid.size());
    parallel_for(out.realizations, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const auto v = eval.evaluate(ensemble.row(r), dvecs);
            std::copy(v.begin(), v.end(), out.values.begin() + static_cast<std::ptrdiff_t>(r * v.size()));
        }
    });
    return out;
}

std::vector<double> gamma_function(const FieldEnsemble& ensemble, const std::vector<std::vector<double>>& delta_vecs,
                                   const OrliczFunction& phi) {
    require(!ensemble.axes().empty(), "gamma needs a tensor-grid ensemble");
    const RectangleModulusEvaluator eval(ensemble.axes());
    const std::size_t m = ensemble.realizations(), k = delta_vecs.size();
    std::vector<double> omega(m * k);
    parallel_for(m, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const auto v = eval.evaluate(ensemble.row(r), delta_vecs);
            std::copy(v.begin(), v.end(), omega.begin() + static_cast<std::ptrdiff_t>(r * k));
        }
    });
    std::vector<double> out(k);
    std::vector<double> col(m);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t r = 0; r < m; ++r) col[r] = omega[r * k + j];
        out[j] = luxemburg_norm(col, phi);
    }
    return out;
}

}  // namespace fcont
