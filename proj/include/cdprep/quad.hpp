#pragma once

#include <functional>

namespace cdprep {

/// Adaptive Gauss-Kronrod (G7,K15) quadrature of f over [a, b].  Throws
/// std::runtime_error if the error estimate does not reach abs_tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10);

}  // namespace cdprep
