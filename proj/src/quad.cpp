#include "cdprep/quad.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace cdprep {

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol) {
  if (!(b >= a)) throw std::invalid_argument("integrate: requires b >= a");
  if (a == b) return 0.0;
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, /*max_depth=*/15, /*rel_tol=*/1e-13, &error);
  if (!(error <= abs_tol) && !(error <= 1e-12 * std::abs(value)))
    throw std::runtime_error("integrate: error estimate " + std::to_string(error) +
                             " above tolerance " + std::to_string(abs_tol));
  return value;
}

}  // namespace cdprep
