#include "cdprep/schedules.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "cdprep/io.hpp"
#include "cdprep/quad.hpp"

namespace cdprep {

namespace {
constexpr double kPi = std::numbers::pi;
}

SweepFunction::SweepFunction(double tau) : tau_(tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("SweepFunction: tau must be positive");
}

void SweepFunction::check_range(double t) const {
  if (t < -1e-12 || t > tau_ * (1.0 + 1e-12))
    throw std::out_of_range("SweepFunction: t=" + std::to_string(t) + " outside [0, " +
                            std::to_string(tau_) + "]");
}

double SweepFunction::lambda(double t) const {
  check_range(t);
  const double inner = std::sin(kPi * t / (2.0 * tau_));
  const double s = std::sin(0.5 * kPi * inner * inner);
  return s * s;
}

double SweepFunction::dlambda(double t) const {
  check_range(t);
  const double inner = std::sin(kPi * t / (2.0 * tau_));
  const double u = inner * inner;
  return (kPi * kPi / (4.0 * tau_)) * std::sin(kPi * u) * std::sin(kPi * t / tau_);
}

double SweepFunction::d2lambda(double t) const {
  check_range(t);
  const double inner = std::sin(kPi * t / (2.0 * tau_));
  const double u = inner * inner;
  const double st = std::sin(kPi * t / tau_);
  const double ct = std::cos(kPi * t / tau_);
  return (kPi * kPi / (4.0 * tau_)) *
         ((kPi * kPi / (2.0 * tau_)) * std::cos(kPi * u) * st * st +
          (kPi / tau_) * std::sin(kPi * u) * ct);
}

Boundary resolve_boundary(Boundary b, int length) {
  if (b != Boundary::automatic) return b;
  return (length % 2 == 0) ? Boundary::periodic : Boundary::antiperiodic;
}

double boundary_bond_sign(Boundary b, int length) {
  return resolve_boundary(b, length) == Boundary::antiperiodic ? -1.0 : 1.0;
}

std::vector<Bond> chain_bonds(int length, Boundary b) {
  if (length < 2) throw std::invalid_argument("chain_bonds: need L >= 2");
  const double sign = boundary_bond_sign(b, length);
  if (length == 2) return {{0, 1, sign > 0 ? 1.0 : -1.0}};
  std::vector<Bond> bonds;
  bonds.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i + 1 < length; ++i) bonds.push_back({i, i + 1, 1.0});
  bonds.push_back({length - 1, 0, sign});
  return bonds;
}

PauliSum uniform_sum(int length, char letter, double coeff) {
  PauliSum out(length);
  for (int i = 0; i < length; ++i) out.add(PauliString::single(length, i, letter), coeff);
  return out;
}

PauliSum two_site_symmetric_sum(int length, char la, char lb, Boundary b, double coeff) {
  PauliSum out(length);
  for (const Bond& bond : chain_bonds(length, b)) {
    auto [pa1, s1] = multiply(PauliString::single(length, bond.a, la),
                              PauliString::single(length, bond.b, lb));
    auto [pa2, s2] = multiply(PauliString::single(length, bond.a, lb),
                              PauliString::single(length, bond.b, la));
    out.add(s1, bond.sign * coeff * pa1);
    out.add(s2, bond.sign * coeff * pa2);
  }
  return out;
}

PauliSum tfim_hamiltonian(int length, double hz, double hx, double J, Boundary b) {
  PauliSum out(length);
  for (int i = 0; i < length; ++i) {
    out.add(PauliString::single(length, i, 'Z'), hz);
    out.add(PauliString::single(length, i, 'X'), hx);
  }
  for (const Bond& bond : chain_bonds(length, b)) {
    auto [phase, zz] = multiply(PauliString::single(length, bond.a, 'Z'),
                                PauliString::single(length, bond.b, 'Z'));
    out.add(zz, phase * bond.sign * J);
  }
  return out;
}

PauliSum tfim_dlambda(int length, const ModelSchedules& m, Boundary b) {
  return tfim_hamiltonian(length, m.dh_z(0.0), m.dh_x(0.0), m.dJ(0.0), b);
}

double alpha_first_order(double lambda, const ModelSchedules& m) {
  const double hz = m.h_z(lambda);
  const double hx = m.h_x(lambda);
  const double J = m.J(lambda);
  const double denom = hz * hz + hx * hx + 2.0 * J * J;
  if (denom < 1e-300)
    throw std::runtime_error("alpha_first_order: all couplings vanish at lambda=" +
                             std::to_string(lambda));
  return 0.5 * (-m.dh_z(lambda) * hx + m.dh_x(lambda) * hz) / denom;
}

namespace {

bool is_imaginary_compatible(const PauliSum& op) {
  if (!op.is_hermitian()) return false;
  for (const auto& [p, c] : op.terms())
    if (p.y_count() % 2 == 0) return false;
  return true;
}

}  // namespace

VariationalResult solve_variational(const PauliSum& H, const PauliSum& dH,
                                    const std::vector<PauliSum>& basis) {
  if (!H.is_hermitian() || !dH.is_hermitian())
    throw std::invalid_argument("solve_variational: H and dH must be self-adjoint");
  for (const auto& op : basis)
    if (!is_imaginary_compatible(op))
      throw std::invalid_argument(
          "solve_variational: basis operators must be Hermitian with purely "
          "imaginary matrix representation (odd Y count per string)");

  const int n = static_cast<int>(basis.size());
  std::vector<PauliSum> d_ops;  // D_k = i [O_k, H], Hermitian
  d_ops.reserve(basis.size());
  for (const auto& op : basis) d_ops.push_back(cplx{0.0, 1.0} * commutator(op, H));

  Eigen::MatrixXd gram(n, n);
  Eigen::VectorXd rhs(n);
  for (int k = 0; k < n; ++k) {
    rhs(k) = -std::real(hs_inner(d_ops[static_cast<std::size_t>(k)], dH));
    for (int l = k; l < n; ++l) {
      gram(k, l) = gram(l, k) = std::real(
          hs_inner(d_ops[static_cast<std::size_t>(k)], d_ops[static_cast<std::size_t>(l)]));
    }
  }

  // Minimum-norm solve of gram beta = rhs via spectral pseudo-inverse.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  const double rank_tol = std::max(scale, 1.0) * 1e-12;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
  int rank = 0;
  const Eigen::VectorXd proj = es.eigenvectors().transpose() * rhs;
  for (int i = 0; i < n; ++i) {
    if (es.eigenvalues()(i) > rank_tol) {
      beta += (proj(i) / es.eigenvalues()(i)) * es.eigenvectors().col(i);
      ++rank;
    }
  }

  VariationalResult out;
  out.beta.assign(beta.data(), beta.data() + n);
  out.rank = rank;
  // S(beta) = S0 + 2 b.beta + beta^T M beta reduces to S0 + b.beta at the
  // stationary point.
  out.action = std::real(hs_inner(dH, dH)) - rhs.dot(beta);
  return out;
}

std::vector<PauliSum> second_order_ansatz(int length, Boundary b) {
  return {uniform_sum(length, 'Y'), two_site_symmetric_sum(length, 'Y', 'Z', b),
          two_site_symmetric_sum(length, 'Y', 'X', b)};
}

double nu_lambda_f(const ModelSchedules& m, double tau) {
  const SweepFunction sweep(tau);
  const auto integrand = [&](double t) {
    return sweep.dlambda(t) * alpha_first_order(sweep.lambda(t), m);
  };
  return integrate(integrand, 0.0, tau, 1e-10) / kPi;
}

double lambda_f_opt(const ModelSchedules& m, double tau) {
  const double nu = nu_lambda_f(m, tau);
  if (std::abs(nu) < 1e-14)
    throw std::runtime_error("lambda_f_opt: nu vanishes, the drive has no effect");
  return 1.0 / (4.0 * nu);
}

void write_schedule_csv(const std::string& path, const ModelSchedules& m, double tau,
                        double lambda_f, int points) {
  if (points < 2) throw std::invalid_argument("write_schedule_csv: need at least 2 points");
  const SweepFunction sweep(tau);
  CsvWriter csv(path, {"t", "lambda", "dlambda_dt", "h_z", "h_x", "J", "alpha",
                       "cd_amplitude"});
  for (int i = 0; i < points; ++i) {
    const double t = tau * static_cast<double>(i) / static_cast<double>(points - 1);
    const double lam = sweep.lambda(t);
    const double dlam = sweep.dlambda(t);
    const double alpha = alpha_first_order(lam, m);
    csv.row({t, lam, dlam, m.h_z(lam), m.h_x(lam), m.J(lam), alpha,
             lambda_f * dlam * alpha});
  }
}

}  // namespace cdprep
