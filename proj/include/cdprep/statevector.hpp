#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "cdprep/pauli.hpp"

namespace cdprep {

/// 2^L complex amplitudes.  Bit i of a basis index is the state of site i
/// (1 means spin-down |1>, the -1 eigenstate of Z), so the leftmost character
/// of a bitstring label corresponds to site 0.
class StateVector {
 public:
  explicit StateVector(int length);
  static StateVector basis_state(int length, std::uint64_t bits);
  static StateVector from_amplitudes(int length, std::vector<cplx> amplitudes);

  int size() const { return size_; }
  std::uint64_t dim() const { return std::uint64_t{1} << size_; }
  cplx& operator[](std::uint64_t i) { return amp_[i]; }
  const cplx& operator[](std::uint64_t i) const { return amp_[i]; }
  const std::vector<cplx>& amplitudes() const { return amp_; }
  std::vector<cplx>& amplitudes() { return amp_; }

  double norm() const;
  void normalize();

 private:
  int size_;
  std::vector<cplx> amp_;
};

cplx inner(const StateVector& a, const StateVector& b);
/// |<a|b>|^2 — symmetric and global-phase invariant.
double fidelity(const StateVector& a, const StateVector& b);

/// H|psi> via per-term bitmask index transforms (matrix-free, gather form).
/// Threads split the output range when the state is large; zero means auto.
void apply_into(const PauliSum& h, const StateVector& in, StateVector& out,
                int threads = 0);
StateVector apply(const PauliSum& h, const StateVector& psi, int threads = 0);

/// <psi|H|psi> for self-adjoint H; the imaginary residue stays below
/// 1e-10 * scale by Hermiticity, only the real part is returned.
double expectation(const PauliSum& h, const StateVector& psi);

/// In-place single-site kernel, row-major 2x2 matrix {u00, u01, u10, u11}.
void apply_one_site(StateVector& psi, int site, const std::array<cplx, 4>& u);

struct SpectrumResult {
  std::vector<double> energies;        // ascending
  std::vector<StateVector> states;
  std::vector<bool> degenerate;        // |e_i - e_j| < 1e-9 for some j != i
  double max_residual = 0.0;           // max ||Hv - ev||
};

struct GroundState {
  double energy = 0.0;
  StateVector state;
  int degeneracy = 1;  // ground-space multiplicity at tolerance 1e-9
};

/// Lowest eigenpair: dense diagonalization up to dense_limit sites,
/// matrix-free Lanczos with full reorthogonalization above.
GroundState ground_state(const PauliSum& h, int dense_limit = 10);
SpectrumResult low_spectrum(const PauliSum& h, int k, int dense_limit = 10);

/// Lanczos path, exposed for direct testing against the dense route.
SpectrumResult lanczos_low_spectrum(const PauliSum& h, int k, int max_iter = 400,
                                    double residual_tol = 1e-9);

constexpr double kDegeneracyTol = 1e-9;

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> norm_drift;  // |norm - 1| observed at each sample
  double max_norm_drift = 0.0;     // before any renormalization
  std::size_t steps = 0;
  std::size_t rhs_evals = 0;
};

/// Integrates i d/dt psi = H(t) psi with an adaptive Dormand-Prince 5(4)
/// embedded pair under PI step control.  States are recorded at the given
/// sample times (sorted, within [t0, t1]).  The state is renormalized only
/// when the norm drift exceeds 1e-9; the pre-renormalization drift is kept.
Trajectory evolve(const std::function<PauliSum(double)>& h_of_t, const StateVector& psi0,
                  double t0, double t1, double tol, std::vector<double> sample_times);

}  // namespace cdprep
