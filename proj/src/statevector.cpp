#include "cdprep/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>

namespace cdprep {

namespace {

constexpr cplx kPhaseTable[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

void check_same_size(int a, int b, const char* what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": size mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}  // namespace

StateVector::StateVector(int length) : size_(length) {
  if (length < 1 || length > 30)
    throw std::invalid_argument("StateVector: length must be in [1, 30]");
  amp_.assign(dim(), cplx{0, 0});
}

StateVector StateVector::basis_state(int length, std::uint64_t bits) {
  StateVector psi(length);
  if (bits >= psi.dim()) throw std::invalid_argument("basis_state: bits out of range");
  psi.amp_[bits] = cplx{1, 0};
  return psi;
}

StateVector StateVector::from_amplitudes(int length, std::vector<cplx> amplitudes) {
  StateVector psi(length);
  if (amplitudes.size() != psi.dim())
    throw std::invalid_argument("from_amplitudes: expected 2^L amplitudes");
  psi.amp_ = std::move(amplitudes);
  return psi;
}

double StateVector::norm() const {
  double acc = 0.0;
  for (const cplx& a : amp_) acc += std::norm(a);
  return std::sqrt(acc);
}

void StateVector::normalize() {
  const double n = norm();
  if (n < 1e-300) throw std::runtime_error("cannot normalize a zero state");
  const double inv = 1.0 / n;
  for (cplx& a : amp_) a *= inv;
}

cplx inner(const StateVector& a, const StateVector& b) {
  check_same_size(a.size(), b.size(), "inner");
  cplx acc{0, 0};
  for (std::uint64_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double fidelity(const StateVector& a, const StateVector& b) {
  return std::norm(inner(a, b));
}

namespace {

// out[o] += coef * i^{|x&z|} * (-1)^{popcount(z & (o^x))} * in[o^x] for one term,
// gather form so disjoint output ranges are thread-safe.
void apply_range(const PauliSum& h, const std::vector<cplx>& in, std::vector<cplx>& out,
                 std::uint64_t begin, std::uint64_t end) {
  for (const auto& [p, c] : h.terms()) {
    const cplx base = kPhaseTable[p.y_count() % 4] * c;
    const std::uint64_t x = p.x;
    const std::uint64_t z = p.z;
    if (z == 0) {
      for (std::uint64_t o = begin; o < end; ++o) out[o] += base * in[o ^ x];
    } else {
      for (std::uint64_t o = begin; o < end; ++o) {
        const std::uint64_t src = o ^ x;
        const double sign = (std::popcount(z & src) & 1) ? -1.0 : 1.0;
        out[o] += sign * base * in[src];
      }
    }
  }
}

}  // namespace

void apply_into(const PauliSum& h, const StateVector& in, StateVector& out, int threads) {
  check_same_size(h.size(), in.size(), "apply");
  check_same_size(in.size(), out.size(), "apply");
  const std::uint64_t dim = in.dim();
  std::fill(out.amplitudes().begin(), out.amplitudes().end(), cplx{0, 0});

  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (dim < (1u << 12)) threads = 1;

  if (threads == 1) {
    apply_range(h, in.amplitudes(), out.amplitudes(), 0, dim);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  const std::uint64_t chunk = (dim + static_cast<std::uint64_t>(threads) - 1) /
                              static_cast<std::uint64_t>(threads);
  for (int t = 0; t < threads; ++t) {
    const std::uint64_t begin = static_cast<std::uint64_t>(t) * chunk;
    const std::uint64_t end = std::min(dim, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      apply_range(h, in.amplitudes(), out.amplitudes(), begin, end);
    });
  }
  for (auto& th : pool) th.join();
}

StateVector apply(const PauliSum& h, const StateVector& psi, int threads) {
  StateVector out(psi.size());
  apply_into(h, psi, out, threads);
  return out;
}

double expectation(const PauliSum& h, const StateVector& psi) {
  if (!h.is_hermitian())
    throw std::invalid_argument("expectation: operator must be self-adjoint");
  const StateVector hpsi = apply(h, psi);
  return inner(psi, hpsi).real();
}

void apply_one_site(StateVector& psi, int site, const std::array<cplx, 4>& u) {
  if (site < 0 || site >= psi.size())
    throw std::invalid_argument("apply_one_site: site out of range");
  const std::uint64_t mask = std::uint64_t{1} << site;
  auto& amp = psi.amplitudes();
  for (std::uint64_t b = 0; b < psi.dim(); ++b) {
    if (b & mask) continue;
    const cplx a0 = amp[b];
    const cplx a1 = amp[b | mask];
    amp[b] = u[0] * a0 + u[1] * a1;
    amp[b | mask] = u[2] * a0 + u[3] * a1;
  }
}

namespace {

SpectrumResult dense_low_spectrum(const PauliSum& h, int k, int dense_limit) {
  const Eigen::MatrixXcd m = to_dense(h, dense_limit);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense eigensolver failed");

  SpectrumResult out;
  const auto dim = m.rows();
  for (int i = 0; i < k; ++i) {
    out.energies.push_back(es.eigenvalues()(i));
    std::vector<cplx> amps(static_cast<std::size_t>(dim));
    Eigen::VectorXcd::Map(amps.data(), dim) = es.eigenvectors().col(i);
    out.states.push_back(StateVector::from_amplitudes(h.size(), std::move(amps)));
  }
  // Degeneracy flags consider the full spectrum, not just the returned slice.
  for (int i = 0; i < k; ++i) {
    bool deg = false;
    if (i > 0 && out.energies[static_cast<std::size_t>(i)] -
                     out.energies[static_cast<std::size_t>(i - 1)] < kDegeneracyTol)
      deg = true;
    if (i + 1 < dim && es.eigenvalues()(i + 1) - es.eigenvalues()(i) < kDegeneracyTol)
      deg = true;
    out.degenerate.push_back(deg);
  }
  for (int i = 0; i < k; ++i) {
    const StateVector resid = apply(h, out.states[static_cast<std::size_t>(i)]);
    double acc = 0.0;
    for (std::uint64_t j = 0; j < out.states[static_cast<std::size_t>(i)].dim(); ++j)
      acc += std::norm(resid[j] - out.energies[static_cast<std::size_t>(i)] *
                                      out.states[static_cast<std::size_t>(i)][j]);
    out.max_residual = std::max(out.max_residual, std::sqrt(acc));
  }
  return out;
}

double dot_sub(std::vector<cplx>& w, const std::vector<cplx>& v) {
  // w -= <v, w> v; returns |<v, w>| before subtraction.
  cplx ov{0, 0};
  for (std::size_t i = 0; i < w.size(); ++i) ov += std::conj(v[i]) * w[i];
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= ov * v[i];
  return std::abs(ov);
}

double vec_norm(const std::vector<cplx>& v) {
  double acc = 0.0;
  for (const cplx& a : v) acc += std::norm(a);
  return std::sqrt(acc);
}

}  // namespace

SpectrumResult lanczos_low_spectrum(const PauliSum& h, int k, int max_iter,
                                    double residual_tol) {
  if (!h.is_hermitian())
    throw std::invalid_argument("lanczos_low_spectrum: operator must be self-adjoint");
  const int L = h.size();
  const std::uint64_t dim = std::uint64_t{1} << L;
  if (k < 1 || static_cast<std::uint64_t>(k) > dim)
    throw std::invalid_argument("lanczos_low_spectrum: bad k");
  max_iter = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(max_iter), dim));

  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto fresh_vector = [&](const std::vector<std::vector<cplx>>& basis) {
    std::vector<cplx> v(dim);
    for (int attempt = 0; attempt < 8; ++attempt) {
      for (auto& a : v) a = cplx{gauss(rng), gauss(rng)};
      for (const auto& b : basis) dot_sub(v, b);
      const double n = vec_norm(v);
      if (n > 1e-8) {
        for (auto& a : v) a /= n;
        return v;
      }
    }
    throw std::runtime_error("lanczos: failed to build an orthogonal start vector");
  };

  std::vector<std::vector<cplx>> basis;
  std::vector<double> alpha, beta;  // beta[j] couples v_j -> v_{j+1}
  basis.push_back(fresh_vector({}));

  StateVector win(L), wout(L);
  const double scale = std::max(1.0, h.max_abs_coefficient() * L);

  auto ritz = [&](int m, Eigen::VectorXd& vals, Eigen::MatrixXd& vecs) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    vals = es.eigenvalues();
    vecs = es.eigenvectors();
  };

  Eigen::VectorXd vals;
  Eigen::MatrixXd vecs;
  int m = 0;
  for (int j = 0; j < max_iter; ++j) {
    win.amplitudes() = basis[static_cast<std::size_t>(j)];
    apply_into(h, win, wout);
    std::vector<cplx>& w = wout.amplitudes();

    cplx aj{0, 0};
    for (std::uint64_t i = 0; i < dim; ++i)
      aj += std::conj(basis[static_cast<std::size_t>(j)][i]) * w[i];
    alpha.push_back(aj.real());
    // Full reorthogonalization, twice, keeps the basis orthonormal to
    // machine precision even for many iterations.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) dot_sub(w, b);

    const double bj = vec_norm(w);
    m = j + 1;

    bool exhausted_subspace = bj < 1e-12 * scale;
    if (!exhausted_subspace) {
      beta.push_back(bj);
      std::vector<cplx> next = w;
      for (auto& a : next) a /= bj;
      basis.push_back(std::move(next));
    }

    const bool enough = (m >= std::max(k + 2, 8) && m % 5 == 0) || m >= max_iter ||
                        static_cast<std::uint64_t>(m) == dim;
    if (enough || exhausted_subspace) {
      ritz(m, vals, vecs);
      bool converged = m >= k;
      if (converged) {
        const double tail = exhausted_subspace ? 0.0 : bj;
        for (int i = 0; i < k; ++i)
          if (tail * std::abs(vecs(m - 1, i)) > residual_tol) converged = false;
      }
      if (converged || static_cast<std::uint64_t>(m) == dim) break;
      if (exhausted_subspace) {
        if (static_cast<std::uint64_t>(m) >= dim) break;
        beta.push_back(0.0);
        basis.push_back(fresh_vector(basis));
      }
    }
  }

  if (m < k) throw std::runtime_error("lanczos: Krylov space smaller than requested k");
  ritz(m, vals, vecs);

  SpectrumResult out;
  for (int i = 0; i < k; ++i) {
    out.energies.push_back(vals(i));
    std::vector<cplx> amps(dim, cplx{0, 0});
    for (int j = 0; j < m; ++j) {
      const double wgt = vecs(j, i);
      if (std::abs(wgt) < 1e-15) continue;
      const auto& bv = basis[static_cast<std::size_t>(j)];
      for (std::uint64_t q = 0; q < dim; ++q) amps[q] += wgt * bv[q];
    }
    StateVector state = StateVector::from_amplitudes(L, std::move(amps));
    state.normalize();
    out.states.push_back(std::move(state));
  }
  for (int i = 0; i < k; ++i) {
    bool deg = false;
    for (int j = 0; j < m; ++j)
      if (j != i && std::abs(vals(j) - vals(i)) < kDegeneracyTol) deg = true;
    out.degenerate.push_back(deg);
  }
  for (int i = 0; i < k; ++i) {
    const StateVector resid = apply(h, out.states[static_cast<std::size_t>(i)]);
    double acc = 0.0;
    for (std::uint64_t q = 0; q < dim; ++q)
      acc += std::norm(resid[q] -
                       out.energies[static_cast<std::size_t>(i)] *
                           out.states[static_cast<std::size_t>(i)][q]);
    out.max_residual = std::max(out.max_residual, std::sqrt(acc));
  }
  if (out.max_residual > 1e-8)
    throw std::runtime_error("lanczos: not converged, residual " +
                             std::to_string(out.max_residual));
  return out;
}

SpectrumResult low_spectrum(const PauliSum& h, int k, int dense_limit) {
  if (!h.is_hermitian())
    throw std::invalid_argument("low_spectrum: operator must be self-adjoint");
  if (static_cast<std::uint64_t>(k) > (std::uint64_t{1} << h.size()))
    throw std::invalid_argument("low_spectrum: k exceeds Hilbert-space dimension");
  if (h.size() <= dense_limit) return dense_low_spectrum(h, k, dense_limit);
  return lanczos_low_spectrum(h, k);
}

GroundState ground_state(const PauliSum& h, int dense_limit) {
  const int probe = static_cast<int>(
      std::min<std::uint64_t>(3, std::uint64_t{1} << h.size()));
  const SpectrumResult s = low_spectrum(h, probe, dense_limit);
  GroundState g{s.energies[0], s.states[0], 1};
  for (std::size_t i = 1; i < s.energies.size(); ++i)
    if (s.energies[i] - s.energies[0] < kDegeneracyTol) ++g.degeneracy;
  return g;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kErr[7] = {71.0 / 57600,    0.0,          -71.0 / 16695, 71.0 / 1920,
                            -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

}  // namespace

Trajectory evolve(const std::function<PauliSum(double)>& h_of_t, const StateVector& psi0,
                  double t0, double t1, double tol, std::vector<double> sample_times) {
  if (!(t1 > t0)) throw std::invalid_argument("evolve: requires t1 > t0");
  if (!(tol > 0.0)) throw std::invalid_argument("evolve: tol must be positive");
  std::sort(sample_times.begin(), sample_times.end());
  for (double t : sample_times)
    if (t < t0 - 1e-12 || t > t1 + 1e-12)
      throw std::invalid_argument("evolve: sample time outside [t0, t1]");

  const int L = psi0.size();
  const std::uint64_t dim = psi0.dim();
  Trajectory traj;

  std::vector<cplx> y = psi0.amplitudes();
  std::vector<std::vector<cplx>> k(7, std::vector<cplx>(dim));
  std::vector<cplx> ytmp(dim), ynew(dim);
  StateVector scratch_in(L), scratch_out(L);

  auto rhs = [&](double t, const std::vector<cplx>& state, std::vector<cplx>& deriv) {
    scratch_in.amplitudes() = state;
    apply_into(h_of_t(t), scratch_in, scratch_out);
    const auto& hy = scratch_out.amplitudes();
    for (std::uint64_t i = 0; i < dim; ++i)
      deriv[i] = cplx{hy[i].imag(), -hy[i].real()};  // -i H psi
    ++traj.rhs_evals;
  };

  double t = t0;
  rhs(t, y, k[0]);

  // Starting step from the RHS magnitude, refined by the controller.
  double d1 = 0.0;
  for (const cplx& a : k[0]) d1 += std::norm(a);
  d1 = std::sqrt(d1 / static_cast<double>(dim));
  double h = std::min((t1 - t0) / 10.0, 0.01 / (d1 + 1e-12));

  std::size_t next_sample = 0;
  auto record_samples = [&](double drift) {
    while (next_sample < sample_times.size() &&
           sample_times[next_sample] <= t + 1e-12 * (t1 - t0)) {
      traj.times.push_back(sample_times[next_sample]);
      traj.states.push_back(StateVector::from_amplitudes(L, y));
      traj.norm_drift.push_back(drift);
      ++next_sample;
    }
  };
  record_samples(0.0);

  constexpr double kSafety = 0.9;
  double err_old = 1e-4;
  const double h_floor = 1e-14 * (t1 - t0);
  const std::size_t max_steps = 50'000'000;

  while (t < t1 - 1e-14 * (t1 - t0)) {
    double target = t1;
    if (next_sample < sample_times.size()) target = sample_times[next_sample];
    if (t + h > target) h = target - t;
    if (h < h_floor)
      throw std::runtime_error("evolve: step size underflow (stiff failure) at t=" +
                               std::to_string(t));

    for (int stage = 1; stage < 7; ++stage) {
      for (std::uint64_t i = 0; i < dim; ++i) {
        cplx acc = y[i];
        for (int j = 0; j < stage; ++j)
          if (kA[stage][j] != 0.0) acc += h * kA[stage][j] * k[static_cast<std::size_t>(j)][i];
        ytmp[i] = acc;
      }
      rhs(t + kC[stage] * h, ytmp, k[static_cast<std::size_t>(stage)]);
    }
    // Stage 7 evaluated the 5th-order solution (FSAL): ytmp == ynew.
    ynew = ytmp;

    double err_acc = 0.0;
    for (std::uint64_t i = 0; i < dim; ++i) {
      cplx e{0, 0};
      for (int j = 0; j < 7; ++j)
        if (kErr[j] != 0.0) e += kErr[j] * k[static_cast<std::size_t>(j)][i];
      const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err_acc += std::norm(h * e) / (sc * sc);
    }
    const double err = std::sqrt(err_acc / static_cast<double>(dim));

    if (err <= 1.0) {
      t += h;
      y.swap(ynew);
      k[0] = k[6];  // FSAL
      ++traj.steps;

      double nrm = 0.0;
      for (const cplx& a : y) nrm += std::norm(a);
      nrm = std::sqrt(nrm);
      const double drift = std::abs(nrm - 1.0);
      traj.max_norm_drift = std::max(traj.max_norm_drift, drift);
      if (drift > 1e-9) {
        const double inv = 1.0 / nrm;
        for (cplx& a : y) a *= inv;
      }
      record_samples(drift);

      const double fac = kSafety * std::pow(err + 1e-30, -0.17) * std::pow(err_old, 0.04);
      h *= std::clamp(fac, 0.2, 5.0);
      err_old = std::max(err, 1e-4);
    } else {
      const double fac = kSafety * std::pow(err, -0.2);
      h *= std::clamp(fac, 0.1, 1.0);
    }
    if (traj.steps + 1 > max_steps) throw std::runtime_error("evolve: step budget exceeded");
  }
  record_samples(traj.norm_drift.empty() ? 0.0 : traj.norm_drift.back());

  if (traj.times.empty() || traj.times.back() < t1 - 1e-9 * (t1 - t0)) {
    // Callers that pass no samples still get the final state.
    if (sample_times.empty()) {
      traj.times.push_back(t1);
      traj.states.push_back(StateVector::from_amplitudes(L, y));
      traj.norm_drift.push_back(traj.max_norm_drift);
    }
  }
  return traj;
}

}  // namespace cdprep
