#pragma once

#include <vector>

namespace chieb::detail {

// Clamped B-spline basis of fixed degree on a non-uniform knot vector.
// Evaluation of all non-zero basis functions and their derivatives follows
// the standard triangular schemes (Cox-de Boor / DersBasisFuns).
class BSplineBasis {
public:
    BSplineBasis(std::vector<double> knots, int degree)
        : knots_(std::move(knots)), degree_(degree) {}

    int size() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
    double lower() const { return knots_.front(); }
    double upper() const { return knots_.back(); }
    const std::vector<double>& knots() const { return knots_; }
    int degree() const { return degree_; }

    // Fills `out` (length size()) with the order-th derivative of every basis
    // function at x; x must lie in [lower, upper].
    void eval(double x, int order, std::vector<double>& out) const;

    // Convenience: sum_i coef[i] * d^order B_i(x).
    double value(const std::vector<double>& coef, double x, int order) const;

private:
    int find_span(double x) const;

    std::vector<double> knots_;
    int degree_;
};

}  // namespace chieb::detail
