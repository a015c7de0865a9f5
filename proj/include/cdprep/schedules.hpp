#pragma once

#include <string>
#include <vector>

#include "cdprep/pauli.hpp"

namespace cdprep {

/// Smooth sweep lambda(t) = sin^2((pi/2) sin^2(pi t / 2 tau)) on [0, tau].
/// First and second derivatives vanish at both endpoints.
class SweepFunction {
 public:
  explicit SweepFunction(double tau);

  double tau() const { return tau_; }
  double lambda(double t) const;
  double dlambda(double t) const;
  double d2lambda(double t) const;

 private:
  void check_range(double t) const;
  double tau_;
};

/// Interpolated couplings h_z = h_zi (1 - lambda), h_x = h_xf lambda,
/// J = J_f lambda, with lambda-derivatives.  Dimensionless, J_f tau = 1 by
/// default convention.
struct ModelSchedules {
  double h_zi = 1.0;
  double h_xf = 2.0;
  double J_f = 1.0;

  double h_z(double lambda) const { return h_zi * (1.0 - lambda); }
  double h_x(double lambda) const { return h_xf * lambda; }
  double J(double lambda) const { return J_f * lambda; }
  double dh_z(double) const { return -h_zi; }
  double dh_x(double) const { return h_xf; }
  double dJ(double) const { return J_f; }
};

enum class Boundary { periodic, antiperiodic, automatic };

Boundary resolve_boundary(Boundary b, int length);
/// -1 for the (L-1, 0) bond under antiperiodic conditions, +1 otherwise.
double boundary_bond_sign(Boundary b, int length);

struct Bond {
  int a;
  int b;
  double sign;  // multiplies the bond coupling
};

/// Ring bonds (i, i+1 mod L).  At L=2 the wrap-around bond coincides with the
/// bulk bond and is counted once (explicit antiperiodic flips its sign).
std::vector<Bond> chain_bonds(int length, Boundary b);

PauliSum uniform_sum(int length, char letter, double coeff = 1.0);
/// sum_bonds coeff (A_i B_j + B_i A_j) with the boundary sign folded in.
PauliSum two_site_symmetric_sum(int length, char la, char lb, Boundary b, double coeff = 1.0);
/// hz sum Z_i + hx sum X_i + J sum sign_b Z_i Z_j.
PauliSum tfim_hamiltonian(int length, double hz, double hx, double J, Boundary b);
/// lambda-derivative of the interpolated Hamiltonian (constant in lambda).
PauliSum tfim_dlambda(int length, const ModelSchedules& m, Boundary b);

/// Closed-form first-order counterdiabatic amplitude
/// alpha = (1/2) (-h_z' h_x + h_x' h_z) / (h_z^2 + h_x^2 + 2 J^2).
double alpha_first_order(double lambda, const ModelSchedules& m);

struct VariationalResult {
  std::vector<double> beta;
  double action = 0.0;  // minimized hs_inner(G, G)
  int rank = 0;         // numerical rank of the Gram matrix
};

/// Least-action fit of A = sum_k beta_k O_k: minimizes the Hilbert-Schmidt
/// norm of G = dH + i[A, H] over real beta, solving the normal equations
/// (minimum-norm solution if the Gram matrix is rank deficient).
/// Basis operators must be Hermitian with i*O_k real in the computational
/// basis, i.e. every string carries an odd number of Y factors.
VariationalResult solve_variational(const PauliSum& H, const PauliSum& dH,
                                    const std::vector<PauliSum>& basis);

/// Self-adjoint basis operators for the least-action problem together with
/// their solved amplitudes.
struct AGPAnsatz {
  std::vector<PauliSum> basis;
  std::vector<double> beta;
};

/// First- plus second-order ansatz operators: sum Y_i, the symmetrized YZ and
/// YX two-body sums.
std::vector<PauliSum> second_order_ansatz(int length, Boundary b);

/// Oscillation frequency of the final fidelity in the drive-scale parameter:
/// nu = (1/pi) \int_0^tau  dlambda/dt * alpha(lambda(t)) dt, by adaptive
/// quadrature (abs tol 1e-10).
double nu_lambda_f(const ModelSchedules& m, double tau);

/// Analytically optimal drive scale 1/(4 nu).  Throws if nu vanishes
/// (no counterdiabatic drive; the optimum is undefined).
double lambda_f_opt(const ModelSchedules& m, double tau);

/// CSV columns: t, lambda, dlambda_dt, h_z, h_x, J, alpha, cd_amplitude
/// where cd_amplitude = lambda_f * dlambda/dt * alpha.
void write_schedule_csv(const std::string& path, const ModelSchedules& m, double tau,
                        double lambda_f, int points);

}  // namespace cdprep
