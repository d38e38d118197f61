#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fcont {

struct Knot {
    double x = 0.0;
    double y = 0.0;
};

/// Piecewise-linear function through a finite set of knots with strictly
/// increasing abscissae. Evaluation outside the knot range is flat.
class KnotFunction {
public:
    KnotFunction() = default;
    explicit KnotFunction(std::vector<Knot> knots);

    double operator()(double x) const;

    const std::vector<Knot>& knots() const { return knots_; }
    std::size_t size() const { return knots_.size(); }
    bool empty() const { return knots_.empty(); }
    double front_x() const { return knots_.front().x; }
    double back_x() const { return knots_.back().x; }

    bool is_nondecreasing() const;
    bool is_strictly_increasing() const;

private:
    std::vector<Knot> knots_;
};

/// Pool-adjacent-violators fit: the non-decreasing sequence closest to
/// `values` in least squares.
std::vector<double> isotonic_fit(std::span<const double> values);

/// Ordinary least-squares slope of y against x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

std::vector<double> linspace(double lo, double hi, std::size_t n);
std::vector<double> logspace(double lo, double hi, std::size_t n);

}  // namespace fcont
