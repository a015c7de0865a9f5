#include "cdprep/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cdprep {

BrentResult brent_minimize(const std::function<double(double)>& f, double a, double b,
                           double x_tol, int max_iter) {
  if (!(b > a)) throw std::invalid_argument("brent_minimize: requires b > a");
  constexpr double kGolden = 0.3819660112501051;
  int evals = 0;
  auto eval = [&](double x) {
    ++evals;
    return f(x);
  };

  double x = a + kGolden * (b - a);
  double w = x, v = x;
  double fx = eval(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  for (int iter = 0; iter < max_iter; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol1 = x_tol * 0.5 + 1e-12 * std::abs(x);
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;

    bool parabolic = false;
    if (std::abs(e) > tol1) {
      // Trial parabolic fit through x, v, w.
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = kGolden * e;
    }

    const double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = eval(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, evals};
}

namespace {

struct Simplex {
  std::vector<std::vector<double>> pts;
  std::vector<double> vals;
};

NelderMeadResult simplex_descent(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& x0, double step,
                                 const NelderMeadOptions& opts, int& evals) {
  const std::size_t n = x0.size();
  Simplex s;
  s.pts.push_back(x0);
  s.vals.push_back(f(x0));
  ++evals;
  for (std::size_t i = 0; i < n; ++i) {
    auto p = x0;
    p[i] += step;
    s.pts.push_back(p);
    s.vals.push_back(f(p));
    ++evals;
  }

  auto order = [&]() {
    std::vector<std::size_t> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s.vals[a] < s.vals[b]; });
    Simplex t;
    for (auto i : idx) {
      t.pts.push_back(std::move(s.pts[i]));
      t.vals.push_back(s.vals[i]);
    }
    s = std::move(t);
  };

  bool stagnated = false;
  while (true) {
    order();
    if (evals >= opts.max_evals) {
      stagnated = true;
      break;
    }
    double spread = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      spread = std::max(spread, std::abs(s.pts.back()[i] - s.pts.front()[i]));
    if (spread < opts.x_tol && std::abs(s.vals.back() - s.vals.front()) < opts.f_tol) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += s.pts[i][j];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j)
        p[j] = centroid[j] + coef * (s.pts.back()[j] - centroid[j]);
      return p;
    };

    const auto reflected = blend(-1.0);
    const double fr = f(reflected);
    ++evals;
    if (fr < s.vals.front()) {
      const auto expanded = blend(-2.0);
      const double fe = f(expanded);
      ++evals;
      if (fe < fr) {
        s.pts.back() = expanded;
        s.vals.back() = fe;
      } else {
        s.pts.back() = reflected;
        s.vals.back() = fr;
      }
      continue;
    }
    if (fr < s.vals[n - 1]) {
      s.pts.back() = reflected;
      s.vals.back() = fr;
      continue;
    }
    const auto contracted = blend(fr < s.vals.back() ? -0.5 : 0.5);
    const double fc = f(contracted);
    ++evals;
    if (fc < std::min(fr, s.vals.back())) {
      s.pts.back() = contracted;
      s.vals.back() = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        s.pts[i][j] = s.pts[0][j] + 0.5 * (s.pts[i][j] - s.pts[0][j]);
      s.vals[i] = f(s.pts[i]);
      ++evals;
    }
  }
  order();
  return {s.pts.front(), s.vals.front(), evals, stagnated};
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0, const NelderMeadOptions& opts) {
  if (x0.empty()) throw std::invalid_argument("nelder_mead: empty start point");
  int evals = 0;
  NelderMeadResult best = simplex_descent(f, x0, opts.initial_step, opts, evals);
  double step = opts.initial_step;
  for (int r = 0; r < opts.restarts && evals < opts.max_evals; ++r) {
    step *= 0.25;
    NelderMeadResult next = simplex_descent(f, best.x, step, opts, evals);
    const bool improved = next.f < best.f - opts.f_tol;
    if (next.f < best.f) best = next;
    best.evals = evals;
    if (!improved) break;
  }
  best.evals = evals;
  return best;
}

}  // namespace cdprep
