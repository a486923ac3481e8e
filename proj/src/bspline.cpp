#include "bspline.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace chieb::detail {

int BSplineBasis::find_span(double x) const {
    const int n = size() - 1;  // last basis index
    const int p = degree_;
    if (x >= knots_[n + 1]) return n;
    if (x <= knots_[p]) return p;
    int lo = p, hi = n + 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (x < knots_[mid] ? hi : lo) = mid;
    }
    return lo;
}

void BSplineBasis::eval(double x, int order, std::vector<double>& out) const {
    const int p = degree_;
    const int span = find_span(x);
    out.assign(size(), 0.0);

    // DersBasisFuns (Piegl & Tiller): derivatives up to `order` of the p+1
    // basis functions supported on this span; only row `order` is kept.
    const int n_der = std::min(order, p);
    std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
    std::vector<double> left(p + 1), right(p + 1);
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knots_[span + 1 - j];
        right[j] = knots_[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    std::vector<std::vector<double>> ders(n_der + 1, std::vector<double>(p + 1, 0.0));
    for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];
    std::vector<std::vector<double>> a(2, std::vector<double>(p + 1, 0.0));
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        for (int kk = 1; kk <= n_der; ++kk) {
            double d = 0.0;
            const int rk = r - kk, pk = p - kk;
            if (r >= kk) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = r - 1 <= pk ? kk - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][kk] = -a[s1][kk - 1] / ndu[pk + 1][r];
                d += a[s2][kk] * ndu[r][pk];
            }
            ders[kk][r] = d;
            std::swap(s1, s2);
        }
    }
    double factor = 1.0;
    for (int kk = 1; kk <= n_der; ++kk) factor *= (p - kk + 1);
    if (order > p) return;  // derivative of order > degree vanishes
    for (int j = 0; j <= p; ++j) {
        out[span - p + j] = ders[n_der][j] * (n_der > 0 ? factor : 1.0);
    }
}

double BSplineBasis::value(const std::vector<double>& coef, double x, int order) const {
    static thread_local std::vector<double> buf;
    eval(x, order, buf);
    double acc = 0.0;
    for (int i = 0; i < size(); ++i) acc += coef[i] * buf[i];
    return acc;
}

}  // namespace chieb::detail
