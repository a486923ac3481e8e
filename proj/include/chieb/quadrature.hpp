#pragma once

#include <functional>

namespace chieb {

// Adaptive Gauss-Kronrod (G7/K15) integration on a finite interval.
// Subdivides until the local error estimate meets the tolerance or the depth
// cap is hit; throws numerical_error on failure to converge.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, double abs_tol = 1e-300, int max_depth = 50);

}  // namespace chieb
