#pragma once

#include <functional>

namespace gsfica::quadrature {

// Adaptive integration of f over [a, b] (finite endpoints). Tolerates
// integrable endpoint singularities such as |x|^(2*alpha-2) at 0.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12);

// Integral of f over the whole line, split at 0 so that kinks of the
// implemented densities (Laplace, generalized Gaussian) sit on a boundary.
// [lo, hi] is the truncated support outside of which f is negligible.
double integrate_split(const std::function<double(double)>& f, double lo,
                       double hi, double tol = 1e-12);

}  // namespace gsfica::quadrature
