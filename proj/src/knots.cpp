#include "fcont/knots.hpp"

#include <algorithm>
#include <cmath>

#include "fcont/error.hpp"

namespace fcont {

KnotFunction::KnotFunction(std::vector<Knot> knots) : knots_(std::move(knots)) {
    require(!knots_.empty(), "knot function needs at least one knot");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        require(std::isfinite(knots_[i].x) && std::isfinite(knots_[i].y), "knot coordinates must be finite");
        if (i > 0) require(knots_[i].x > knots_[i - 1].x, "knot abscissae must be strictly increasing");
    }
}

double KnotFunction::operator()(double x) const {
    if (x <= knots_.front().x) return knots_.front().y;
    if (x >= knots_.back().x) return knots_.back().y;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x, [](double v, const Knot& k) { return v < k.x; });
    const Knot& hi = *it;
    const Knot& lo = *(it - 1);
    const double t = (x - lo.x) / (hi.x - lo.x);
    return lo.y + t * (hi.y - lo.y);
}

bool KnotFunction::is_nondecreasing() const {
    for (std::size_t i = 1; i < knots_.size(); ++i)
        if (knots_[i].y < knots_[i - 1].y) return false;
    return true;
}

bool KnotFunction::is_strictly_increasing() const {
    for (std::size_t i = 1; i < knots_.size(); ++i)
        if (knots_[i].y <= knots_[i - 1].y) return false;
    return true;
}

std::vector<double> isotonic_fit(std::span<const double> values) {
    struct Block {
        double sum;
        std::size_t count;
        double mean() const { return sum / static_cast<double>(count); }
    };
    std::vector<Block> blocks;
    blocks.reserve(values.size());
    for (double v : values) {
        blocks.push_back({v, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
            Block top = blocks.back();
            blocks.pop_back();
            blocks.back().sum += top.sum;
            blocks.back().count += top.count;
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean());
    return out;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, "slope fit needs two or more paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    require(sxx > 0, "slope fit needs distinct abscissae");
    return sxy / sxx;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    v.back() = hi;
    return v;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    require(lo > 0 && hi > 0, "logspace bounds must be positive");
    auto v = linspace(std::log(lo), std::log(hi), n);
    for (double& x : v) x = std::exp(x);
    if (n > 0) {
        v.front() = lo;
        v.back() = hi;
    }
    return v;
}

}  // namespace fcont
