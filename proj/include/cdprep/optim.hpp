#pragma once

#include <functional>
#include <vector>

namespace cdprep {

struct BrentResult {
  double x = 0.0;
  double f = 0.0;
  int evals = 0;
};

/// Brent's parabolic-interpolation/golden-section minimizer on [a, b].
/// Stops when the bracket around the minimum shrinks below x_tol.
BrentResult brent_minimize(const std::function<double(double)>& f, double a, double b,
                           double x_tol, int max_iter = 200);

struct NelderMeadOptions {
  double x_tol = 1e-6;
  double f_tol = 1e-10;
  int max_evals = 20000;
  int restarts = 2;
  double initial_step = 0.3;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  bool stagnated = false;
};

/// Downhill simplex with axis-oriented restarts around the incumbent best.
/// Never returns a point worse than the starting one.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0,
                             const NelderMeadOptions& opts = {});

}  // namespace cdprep
