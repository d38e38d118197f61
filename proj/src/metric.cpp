#include "fcont/metric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "fcont/error.hpp"
#include "fcont/fields.hpp"
#include "fcont/parallel.hpp"

namespace fcont {

DiscreteMetricSpace::DiscreteMetricSpace(std::vector<std::string> labels, std::vector<double> dist,
                                         std::vector<std::vector<double>> coords)
    : n_(labels.size()), labels_(std::move(labels)), dist_(std::move(dist)), coords_(std::move(coords)) {
    require(n_ >= 1, "metric space needs at least one point");
    require(dist_.size() == n_ * n_, "distance matrix must be n x n");
    require(coords_.empty() || coords_.size() == n_, "coordinate count must match the point count");
    const double scale = [&] {
        double m = 0;
        for (double v : dist_) m = std::max(m, std::abs(v));
        return std::max(m, 1.0);
    }();
    for (std::size_t i = 0; i < n_; ++i) {
        require(dist_[i * n_ + i] == 0.0, "distance from a point to itself must be 0");
        for (std::size_t j = 0; j < n_; ++j) {
            const double d = dist_[i * n_ + j];
            require(std::isfinite(d) && d >= 0.0, "distances must be finite and non-negative");
            require(std::abs(d - dist_[j * n_ + i]) <= 1e-12 * scale, "distance matrix must be symmetric");
        }
    }
    // exact symmetry from here on
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) dist_[j * n_ + i] = dist_[i * n_ + j];
    finish();
}

DiscreteMetricSpace DiscreteMetricSpace::line(std::vector<double> coords) {
    require(!coords.empty(), "line space needs at least one point");
    for (std::size_t i = 0; i < coords.size(); ++i) {
        require(std::isfinite(coords[i]), "line coordinates must be finite");
        if (i > 0) require(coords[i] > coords[i - 1], "line coordinates must be strictly increasing");
    }
    DiscreteMetricSpace s;
    s.n_ = coords.size();
    s.line_ = true;
    s.labels_.reserve(s.n_);
    s.coords_.reserve(s.n_);
    for (double x : coords) {
        s.labels_.push_back(std::to_string(x));
        s.coords_.push_back({x});
    }
    s.line_x_ = std::move(coords);
    s.finish();
    return s;
}

double DiscreteMetricSpace::operator()(std::size_t i, std::size_t j) const {
    if (line_) return std::abs(line_x_[i] - line_x_[j]);
    return dist_[i * n_ + j];
}

void DiscreteMetricSpace::finish() {
    if (line_) {
        diameter_ = line_x_.back() - line_x_.front();
        min_positive_ = 0.0;
        for (std::size_t i = 1; i < n_; ++i) {
            const double gap = line_x_[i] - line_x_[i - 1];
            min_positive_ = min_positive_ == 0.0 ? gap : std::min(min_positive_, gap);
        }
        pseudo_ = false;
        return;
    }
    diameter_ = 0.0;
    min_positive_ = 0.0;
    pseudo_ = false;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double d = dist_[i * n_ + j];
            diameter_ = std::max(diameter_, d);
            if (d == 0.0)
                pseudo_ = true;
            else
                min_positive_ = min_positive_ == 0.0 ? d : std::min(min_positive_, d);
        }
}

TriangleAudit audit_triangle(const DiscreteMetricSpace& space, std::size_t samples, std::uint64_t seed) {
    TriangleAudit audit;
    const std::size_t n = space.size();
    const double tol = 1e-12 * std::max(1.0, space.diameter());
    auto check = [&](std::size_t i, std::size_t j, std::size_t k) {
        const double excess = space(i, k) - space(i, j) - space(j, k);
        ++audit.triples_checked;
        if (excess > audit.worst_excess) {
            audit.worst_excess = excess;
            audit.i = i;
            audit.j = j;
            audit.k = k;
        }
    };
    if (n <= 200) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) check(i, j, k);
    } else {
        audit.exhaustive = false;
        std::mt19937_64 eng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t s = 0; s < samples; ++s) check(pick(eng), pick(eng), pick(eng));
    }
    audit.ok = audit.worst_excess <= tol;
    return audit;
}

DiscreteMeasure::DiscreteMeasure(std::vector<double> weights) : w_(std::move(weights)) {
    require(!w_.empty(), "measure needs at least one point");
    double total = 0.0;
    for (double w : w_) {
        require(std::isfinite(w) && w >= 0.0, "measure weights must be finite and non-negative");
        total += w;
    }
    require(std::abs(total - 1.0) <= 1e-12, "measure weights must sum to 1");
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t n) {
    require(n >= 1, "uniform measure needs at least one point");
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    // absorb rounding so the weights sum to 1 within 1e-12
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    w.back() += 1.0 - total;
    return DiscreteMeasure(std::move(w));
}

DiscreteMetricSpace extended_integer_space(int n_max) {
    require(n_max >= 2, "extended integer space needs n_max >= 2");
    const auto n = static_cast<std::size_t>(n_max) + 1;
    std::vector<std::string> labels;
    std::vector<double> inv(n);
    for (int k = 1; k <= n_max; ++k) {
        labels.push_back(std::to_string(k));
        inv[static_cast<std::size_t>(k - 1)] = 1.0 / k;
    }
    labels.push_back("inf");
    inv[n - 1] = 0.0;
    std::vector<double> dist(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = std::abs(inv[i] - inv[j]);
    return DiscreteMetricSpace(std::move(labels), std::move(dist));
}

namespace {

template <class PairNorm>
DiscreteMetricSpace increment_space(const FieldEnsemble& ensemble, PairNorm pair_norm) {
    const std::size_t n = ensemble.points();
    const std::size_t m = ensemble.realizations();
    std::vector<std::vector<double>> cols(n);
    for (std::size_t x = 0; x < n; ++x) cols[x] = ensemble.column(x);
    std::vector<double> dist(n * n, 0.0);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> diff(m);
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                for (std::size_t r = 0; r < m; ++r) diff[r] = cols[i][r] - cols[j][r];
                dist[i * n + j] = pair_norm(std::span<const double>(diff));
            }
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) dist[j * n + i] = dist[i * n + j];
    std::vector<std::string> labels(n);
    for (std::size_t x = 0; x < n; ++x) labels[x] = std::to_string(x);
    std::vector<std::vector<double>> coords;
    if (ensemble.axes().size() == 1)
        for (double t : ensemble.axes()[0]) coords.push_back({t});
    return DiscreteMetricSpace(std::move(labels), std::move(dist), std::move(coords));
}

}  // namespace

DiscreteMetricSpace natural_distance(const FieldEnsemble& ensemble, const PsiFunction& psi,
                                     std::span<const double> p_grid) {
    if (psi.is_zero()) throw DegenerateField("natural function is identically zero");
    return increment_space(ensemble, [&](std::span<const double> d) { return grand_lebesgue_norm(d, psi, p_grid); });
}

DiscreteMetricSpace orlicz_distance(const FieldEnsemble& ensemble, const OrliczFunction& phi) {
    return increment_space(ensemble, [&](std::span<const double> d) { return luxemburg_norm(d, phi); });
}

DiscreteMetricSpace gaussian_distance(const FieldEnsemble& ensemble) {
    require(ensemble.realizations() >= 2, "Gaussian distance needs at least two realizations");
    return increment_space(ensemble, [](std::span<const double> d) {
        const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
        double ss = 0.0;
        for (double v : d) ss += (v - mean) * (v - mean);
        return std::sqrt(ss / static_cast<double>(d.size() - 1));
    });
}

// ---------------------------------------------------------------- covering

namespace {

using Bits = std::vector<std::uint64_t>;

struct BallSystem {
    std::vector<std::size_t> members;  // subset -> space index
    std::size_t words = 0;
    std::vector<Bits> balls;  // balls[c] = subset members within eps of centre c
};

BallSystem make_balls(const DiscreteMetricSpace& space, std::span<const std::size_t> subset, double eps) {
    BallSystem bs;
    if (subset.empty()) {
        bs.members.resize(space.size());
        std::iota(bs.members.begin(), bs.members.end(), 0);
    } else {
        bs.members.assign(subset.begin(), subset.end());
        for (std::size_t i : bs.members) require(i < space.size(), "subset index out of range");
    }
    const std::size_t k = bs.members.size();
    bs.words = (k + 63) / 64;
    bs.balls.assign(k, Bits(bs.words, 0));
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t y = 0; y < k; ++y)
            if (space(bs.members[c], bs.members[y]) <= eps) bs.balls[c][y / 64] |= std::uint64_t{1} << (y % 64);
    return bs;
}

std::size_t greedy_cover(const BallSystem& bs) {
    const std::size_t k = bs.members.size();
    Bits uncovered(bs.words, ~std::uint64_t{0});
    if (k % 64) uncovered.back() = (std::uint64_t{1} << (k % 64)) - 1;
    std::size_t remaining = k, used = 0;
    while (remaining > 0) {
        std::size_t best = 0, best_gain = 0;
        for (std::size_t c = 0; c < k; ++c) {
            std::size_t gain = 0;
            for (std::size_t w = 0; w < bs.words; ++w) gain += std::popcount(bs.balls[c][w] & uncovered[w]);
            if (gain > best_gain) {
                best_gain = gain;
                best = c;
            }
        }
        for (std::size_t w = 0; w < bs.words; ++w) uncovered[w] &= ~bs.balls[best][w];
        remaining -= best_gain;
        ++used;
    }
    return used;
}

// Points pairwise more than 2 eps apart: no closed eps-ball holds two of them.
std::size_t greedy_packing(const DiscreteMetricSpace& space, const std::vector<std::size_t>& members, double eps) {
    std::vector<std::size_t> chosen;
    for (std::size_t i : members) {
        bool separated = true;
        for (std::size_t c : chosen)
            if (space(i, c) <= 2.0 * eps) {
                separated = false;
                break;
            }
        if (separated) chosen.push_back(i);
    }
    return chosen.size();
}

std::size_t exhaustive_cover(const BallSystem& bs) {
    const std::size_t k = bs.members.size();
    const std::uint64_t full = k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
    std::size_t best = k;
    for (std::uint64_t mask = 1; mask <= full; ++mask) {
        const auto size = static_cast<std::size_t>(std::popcount(mask));
        if (size >= best) continue;
        std::uint64_t covered = 0;
        for (std::size_t c = 0; c < k; ++c)
            if (mask >> c & 1) covered |= bs.balls[c][0];
        if (covered == full) best = size;
    }
    return best;
}

}  // namespace

CoveringNumber covering_number(const DiscreteMetricSpace& space, std::span<const std::size_t> subset, double eps) {
    require(eps > 0.0 && !std::isnan(eps), "covering radius must be positive");
    const BallSystem bs = make_balls(space, subset, eps);
    CoveringNumber out;
    out.upper = greedy_cover(bs);
    out.lower = greedy_packing(space, bs.members, eps);
    if (bs.members.size() <= 12) {
        out.exact = exhaustive_cover(bs);
    }
    out.entropy_upper = std::log(static_cast<double>(out.upper));
    return out;
}

std::vector<CoveringNumber> covering_profile(const DiscreteMetricSpace& space, std::span<const std::size_t> subset,
                                             std::span<const double> eps_grid) {
    for (std::size_t i = 1; i < eps_grid.size(); ++i)
        require(eps_grid[i] > eps_grid[i - 1], "eps grid must be increasing");
    std::vector<CoveringNumber> out(eps_grid.size());
    parallel_for(eps_grid.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = covering_number(space, subset, eps_grid[i]);
    });
    for (std::size_t i = 1; i < out.size(); ++i) {
        out[i].upper = std::min(out[i].upper, out[i - 1].upper);
        out[i].entropy_upper = std::log(static_cast<double>(out[i].upper));
    }
    for (std::size_t i = out.size(); i-- > 1;) out[i - 1].lower = std::max(out[i - 1].lower, out[i].lower);
    return out;
}

double ball_mass(const DiscreteMetricSpace& space, const DiscreteMeasure& measure, std::size_t x, double r) {
    require(measure.size() == space.size(), "measure and space sizes differ");
    require(x < space.size(), "ball centre out of range");
    require(r >= 0.0, "ball radius must be non-negative");
    double mass = 0.0;
    for (std::size_t y = 0; y < space.size(); ++y)
        if (space(x, y) <= r) mass += measure[y];
    return std::min(mass, 1.0);
}

}  // namespace fcont
