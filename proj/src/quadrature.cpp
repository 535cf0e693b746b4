#include "gsfica/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "gsfica/errors.hpp"

namespace gsfica::quadrature {

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (!(a < b)) return 0.0;
  boost::math::quadrature::tanh_sinh<double> integrator;
  double error = 0.0, l1 = 0.0;
  const double value = integrator.integrate(f, a, b, tol, &error, &l1);
  if (!std::isfinite(value)) {
    throw NumericError("quadrature: divergent or non-finite integral");
  }
  return value;
}

double integrate_split(const std::function<double(double)>& f, double lo,
                       double hi, double tol) {
  double total = 0.0;
  if (lo < 0.0) total += integrate(f, lo, std::min(0.0, hi), tol);
  if (hi > 0.0) total += integrate(f, std::max(0.0, lo), hi, tol);
  return total;
}

}  // namespace gsfica::quadrature
