// Integration acceptance suite: one pass/fail line per criterion, nonzero
// exit if anything fails.  An optional numeric argument restricts the run to
// a single criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cdprep/optim.hpp"
#include "cdprep/protocols.hpp"
#include "cdprep/schedules.hpp"
#include "cdprep/statevector.hpp"
#include "cdprep/trotter.hpp"
#include "oracles.hpp"

using namespace cdprep;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

ProtocolSpec cheap_spec(int L, double hxf, ProtocolKind kind, double lambda_f) {
  ProtocolSpec spec;
  spec.L = L;
  spec.h_xf = hxf;
  spec.kind = kind;
  spec.lambda_f = lambda_f;
  spec.sample_count = 2;
  spec.track_instantaneous = false;
  if (kind == ProtocolKind::lcdlu) spec.lu = fixed_x_pi4();
  return spec;
}

// --------------------------------------------------------------- criterion 1
Check closed_form_vs_variational() {
  Check c;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lam_dist(0.0, 1.0);
  std::uniform_real_distribution<double> hx_dist(0.2, 10.0);
  const int L = 4;
  for (int trial = 0; trial < 50; ++trial) {
    const double lam = lam_dist(rng);
    const ModelSchedules m{1.0, hx_dist(rng), 1.0};
    const PauliSum h =
        tfim_hamiltonian(L, m.h_z(lam), m.h_x(lam), m.J(lam), Boundary::automatic);
    const PauliSum dh = tfim_dlambda(L, m, Boundary::automatic);
    const auto sol = solve_variational(h, dh, {uniform_sum(L, 'Y')});
    const double ref = alpha_first_order(lam, m);
    c.expect(std::abs(sol.beta[0] - ref) <= 1e-12 * std::max(1.0, std::abs(ref)),
             "beta mismatch " + fmt(sol.beta[0] - ref) + " at lambda=" + fmt(lam));
  }
  return c;
}

// --------------------------------------------------------------- criterion 2
Check optimal_lambda_f_law() {
  Check c;
  for (double hxf : {1.0, 2.0, 4.0, 8.0}) {
    ProtocolSpec spec = cheap_spec(4, hxf, ProtocolKind::lcd, 0.0);
    const double analytic = lambda_f_opt(spec.model(), spec.tau);
    const auto opt = optimize_lambda_f(spec);
    const double rel = std::abs(opt.lambda_f - analytic) / analytic;
    c.expect(rel <= 0.05, "h_xf=" + fmt(hxf) + ": brent " + fmt(opt.lambda_f) +
                              " vs 1/(4nu) " + fmt(analytic) + " rel " + fmt(rel));
  }
  return c;
}

// --------------------------------------------------------------- criterion 3
Check oscillation_period() {
  Check c;
  ProtocolSpec spec = cheap_spec(4, 2.0, ProtocolKind::lcd, 0.0);
  const double nu = nu_lambda_f(spec.model(), spec.tau);
  const double period = 1.0 / nu;

  const auto fidelity_at = [&spec](double lf) {
    ProtocolSpec s = spec;
    s.lambda_f = lf;
    return run(s).f_final;
  };
  // Coarse scan over the first two periods, then Brent refinement of the
  // first two interior maxima.
  const double span = 1.6 * period;
  const int n = 120;
  std::vector<double> xs(n + 1), fs(n + 1);
  for (int i = 0; i <= n; ++i) {
    xs[static_cast<std::size_t>(i)] = span * i / n;
    fs[static_cast<std::size_t>(i)] = fidelity_at(xs[static_cast<std::size_t>(i)]);
  }
  std::vector<double> maxima;
  for (int i = 1; i < n && maxima.size() < 2; ++i) {
    if (fs[static_cast<std::size_t>(i)] > fs[static_cast<std::size_t>(i - 1)] &&
        fs[static_cast<std::size_t>(i)] >= fs[static_cast<std::size_t>(i + 1)]) {
      const auto neg = [&](double x) { return 1.0 - fidelity_at(x); };
      maxima.push_back(brent_minimize(neg, xs[static_cast<std::size_t>(i - 1)],
                                      xs[static_cast<std::size_t>(i + 1)], 1e-4)
                           .x);
    }
  }
  c.expect(maxima.size() == 2, "found " + std::to_string(maxima.size()) + " maxima");
  if (maxima.size() == 2) {
    const double spacing = maxima[1] - maxima[0];
    c.expect(std::abs(spacing - period) / period <= 0.05,
             "spacing " + fmt(spacing) + " vs 1/nu " + fmt(period));
  }
  return c;
}

// --------------------------------------------------------------- criterion 4
Check mid_evolution_peak() {
  Check c;
  ProtocolSpec spec = cheap_spec(4, 2.0, ProtocolKind::lcd, 2.0);
  spec.sample_count = 201;
  const RunResult r = run(spec);
  std::size_t imax = 0;
  for (std::size_t i = 0; i < r.f_target.size(); ++i)
    if (r.f_target[i] > r.f_target[imax]) imax = i;
  const double frac = r.times[imax] / spec.tau;
  c.expect(frac >= 0.40 && frac <= 0.48, "argmax at " + fmt(frac) + " tau");
  return c;
}

// ------------------------------------------------------------ criteria 5 & 6
std::vector<int> scaling_sizes() { return {4, 5, 6, 7, 8, 9, 10, 11, 12}; }

Check scaling_strong_field() {
  Check c;
  ProtocolSpec base = cheap_spec(4, 2.0, ProtocolKind::lcd, 0.0);
  const ScalingResult r = scaling_experiment(base, scaling_sizes(), 11, true);
  const double c_ad = r.fit.at("adiabatic").c;
  const double c_lcd = r.fit.at("lcd").c;
  const double c_lu = r.fit.at("lcdlu_opt").c;
  c.expect(c_lcd >= 0.0 && c_lcd <= 0.07, "c_lcd=" + fmt(c_lcd));
  c.expect(c_lu >= 0.0 && c_lu <= 0.08, "c_lcdlu=" + fmt(c_lu));
  c.expect(c_ad >= 1.0 && c_ad <= 1.35, "c_adiabatic=" + fmt(c_ad));
  return c;
}

Check scaling_weak_field() {
  Check c;
  ProtocolSpec base = cheap_spec(4, 0.5, ProtocolKind::lcd, 0.0);
  const ScalingResult r = scaling_experiment(base, scaling_sizes(), 11, false);
  const double c_ad = r.fit.at("adiabatic").c;
  const double c_lcd = r.fit.at("lcd").c;
  const double c_lu = r.fit.at("lcdlu").c;  // fixed X(pi/4)
  c.expect(c_ad >= 2.25 && c_ad <= 3.05, "c_adiabatic=" + fmt(c_ad));
  c.expect(c_lcd >= 0.56 && c_lcd <= 0.76, "c_lcd=" + fmt(c_lcd));
  c.expect(c_lu >= 0.26 && c_lu <= 0.36, "c_lcdlu_fixed=" + fmt(c_lu));
  return c;
}

// --------------------------------------------------------------- criterion 7
Check weak_field_ordering() {
  Check c;
  for (int L : {4, 6, 8}) {
    ProtocolSpec spec = cheap_spec(L, 0.5, ProtocolKind::lcd, 0.0);
    spec.lambda_f = optimize_lambda_f(spec).lambda_f;
    const double f_ad = run(cheap_spec(L, 0.5, ProtocolKind::adiabatic, 0.0)).f_final;
    const double f_lcd = run(spec).f_final;
    ProtocolSpec lu = spec;
    lu.kind = ProtocolKind::lcdlu;
    lu.lu = fixed_x_pi4();
    const double f_fixed = run(lu).f_final;
    const double f_opt = optimize_lu(spec, LuMode::general).fidelity;
    const std::string tag = "L=" + std::to_string(L) + ": ";
    c.expect(f_ad < f_lcd, tag + "adiabatic " + fmt(f_ad) + " !< lcd " + fmt(f_lcd));
    c.expect(f_lcd < f_fixed, tag + "lcd " + fmt(f_lcd) + " !< fixed " + fmt(f_fixed));
    c.expect(f_fixed <= f_opt + 1e-9,
             tag + "fixed " + fmt(f_fixed) + " !<= opt " + fmt(f_opt));
  }
  return c;
}

// --------------------------------------------------------------- criterion 8
Check rotating_frame_exactness() {
  Check c;
  ProtocolSpec spec = cheap_spec(4, 2.0, ProtocolKind::lcd, 1.3);
  for (int i = 0; i <= 20; ++i) {
    const PauliSum h = rotating_frame_h(spec, spec.tau * i / 20.0);
    for (const auto& [p, coeff] : h.terms())
      if (p.y_count() > 0)
        c.expect(std::abs(coeff) < 1e-12, "Y string survives at sample " + std::to_string(i));
  }
  const auto h_rot = [&spec](double t) { return rotating_frame_h(spec, t); };
  Trajectory tr = evolve(h_rot, StateVector::basis_state(4, 0b1111), 0.0, spec.tau,
                         spec.evolve_tol, {spec.tau});
  StateVector lab = apply_uniform_y(tr.states.back(), theta_y(spec, spec.tau));
  lab.normalize();
  const double f = fidelity(lab, run(spec).final_state);
  c.expect(f >= 1.0 - 1e-8, "frame equivalence fidelity deficit " + fmt(1.0 - f));
  return c;
}

// --------------------------------------------------------------- criterion 9
Check trotter_fidelity() {
  Check c;
  for (double hxf : {0.5, 2.0}) {
    ProtocolSpec spec = cheap_spec(4, hxf, ProtocolKind::lcd, 0.0);
    spec.lambda_f = optimize_lambda_f(spec).lambda_f;
    const StateVector cont = run(spec).final_state;
    const StateVector init = StateVector::basis_state(4, 0b1111);
    std::vector<double> dists;
    for (int steps : {10, 20, 40, 80}) {
      const StateVector digit = simulate_circuit(synthesize(spec, steps), init);
      const double f = fidelity(digit, cont);
      if (steps == 20)
        c.expect(f >= 0.99, "h_xf=" + fmt(hxf) + ": F(T=20)=" + fmt(f));
      dists.push_back(std::sqrt(2.0 * (1.0 - std::sqrt(f))));
    }
    for (std::size_t i = 1; i < dists.size(); ++i)
      c.expect(dists[i] < dists[i - 1], "h_xf=" + fmt(hxf) + ": not monotone");
    const double slope = std::log2(dists.back() / dists.front()) / 3.0;
    c.expect(slope >= -1.2 && slope <= -0.8,
             "h_xf=" + fmt(hxf) + ": log-log slope " + fmt(slope));
  }
  return c;
}

// -------------------------------------------------------------- criterion 10
Check shot_based_energy() {
  Check c;
  const std::uint64_t seed = 7;
  for (int L = 2; L <= 14; ++L) {
    ProtocolSpec lcd = cheap_spec(L, 0.5, ProtocolKind::lcd, 0.0);
    lcd.lambda_f = lambda_f_opt(lcd.model(), lcd.tau);
    ProtocolSpec lcdlu = lcd;
    lcdlu.kind = ProtocolKind::lcdlu;
    lcdlu.lu = fixed_x_pi4();

    const PauliSum h0 = base_hamiltonian(lcd, lcd.tau);
    const double e_grd =
        (L <= 10 ? ground_state(h0).energy : lanczos_low_spectrum(h0, 2).energies[0]);
    const StateVector init = StateVector::basis_state(L, (std::uint64_t{1} << L) - 1);

    double ratio_lcd = 0.0, ratio_lu = 0.0;
    for (const ProtocolSpec* spec : {&lcd, &lcdlu}) {
      const StateVector psi = simulate_circuit(synthesize(*spec, 20), init);
      const double exact = expectation(h0, psi);
      const std::uint64_t tag =
          seed + 1000 * static_cast<std::uint64_t>(L) +
          (spec->kind == ProtocolKind::lcdlu ? 500 : 0);
      const ShotRecord rz = sample(psi, MeasBasis::Z, 1000, tag);
      const ShotRecord rx = sample(psi, MeasBasis::X, 1000, tag + 1);
      const EnergyEstimate est =
          estimate_energy(rz, rx, spec->h_xf, spec->J_f, spec->boundary);
      const double pull = std::abs(est.energy - exact) / std::max(est.std_error, 1e-12);
      c.expect(pull <= 3.0, "L=" + std::to_string(L) + " " + to_string(spec->kind) +
                                ": pull " + fmt(pull));
      (spec->kind == ProtocolKind::lcd ? ratio_lcd : ratio_lu) = est.energy / e_grd;
    }
    c.expect(ratio_lu >= ratio_lcd, "L=" + std::to_string(L) + ": ratio lcdlu " +
                                        fmt(ratio_lu) + " < lcd " + fmt(ratio_lcd));
  }
  return c;
}

// -------------------------------------------------------------- criterion 11
Check tomography_reconstruction() {
  Check c;
  ProtocolSpec spec = cheap_spec(4, 0.5, ProtocolKind::lcd, 0.0);
  spec.lambda_f = lambda_f_opt(spec.model(), spec.tau);
  const Circuit prep = synthesize(spec, 20);
  const StateVector init = StateVector::basis_state(4, 0b1111);
  const StateVector psi = simulate_circuit(prep, init);

  const Eigen::MatrixXcd rho_exact = tomography(prep, 0, 1, &init);
  double err = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      err = std::max(err, std::abs(rho_exact(i, j) -
                                   psi[static_cast<std::uint64_t>(i)] *
                                       std::conj(psi[static_cast<std::uint64_t>(j)])));
  c.expect(err <= 1e-10, "exact-expectation max entry error " + fmt(err));

  const Eigen::MatrixXcd rho = tomography(prep, 400, 7, &init);
  const double f = density_state_fidelity(rho, psi);
  c.expect(f >= 0.95, "400-shot reconstruction fidelity " + fmt(f));
  return c;
}

// -------------------------------------------------------------- criterion 12
Check property_suites() {
  Check c;
  std::mt19937_64 rng(99);

  // Pauli identities.
  const char letters[4] = {'I', 'X', 'Y', 'Z'};
  for (char a : letters)
    for (char b : letters)
      for (char d : letters) {
        const auto pa = PauliString::single(1, 0, a);
        const auto pb = PauliString::single(1, 0, b);
        const auto pd = PauliString::single(1, 0, d);
        auto [f1, ab] = multiply(pa, pb);
        auto [f2, ab_d] = multiply(ab, pd);
        auto [g1, bd] = multiply(pb, pd);
        auto [g2, a_bd] = multiply(pa, bd);
        c.expect(ab_d == a_bd && f1 * f2 == g1 * g2, "associativity");
      }
  for (int trial = 0; trial < 6; ++trial) {
    const int L = 2 + static_cast<int>(rng() % 3);
    const PauliSum a = oracles::random_sum(L, 5, rng);
    const PauliSum b = oracles::random_sum(L, 5, rng);
    const PauliSum d = oracles::random_sum(L, 5, rng);
    PauliSum jac = commutator(a, commutator(b, d));
    jac += commutator(b, commutator(d, a));
    jac += commutator(d, commutator(a, b));
    c.expect(jac.max_abs_coefficient() < 1e-12, "Jacobi identity");
    const Eigen::MatrixXcd da = oracles::dense_sum(a);
    const Eigen::MatrixXcd db = oracles::dense_sum(b);
    c.expect(oracles::max_abs(to_dense(commutator(a, b)) - (da * db - db * da)) < 1e-12,
             "dense commutator oracle");
  }

  // Norm and energy conservation plus apply-linearity.
  const PauliSum h = tfim_hamiltonian(4, 0.5, 1.0, 1.0, Boundary::automatic);
  const StateVector psi0 = oracles::random_state(4, rng);
  const Trajectory tr = evolve([&h](double) { return h; }, psi0, 0.0, 2.0, 1e-8, {2.0});
  c.expect(tr.max_norm_drift <= 1e-6, "norm conservation " + fmt(tr.max_norm_drift));
  c.expect(std::abs(expectation(h, tr.states.back()) - expectation(h, psi0)) <= 1e-7,
           "energy conservation");
  const StateVector a = oracles::random_state(4, rng);
  const StateVector b = oracles::random_state(4, rng);
  StateVector combo(4);
  const cplx ca{0.6, -0.2}, cb{-0.3, 0.8};
  for (std::uint64_t i = 0; i < combo.dim(); ++i) combo[i] = ca * a[i] + cb * b[i];
  const StateVector lhs = apply(h, combo);
  const StateVector ha = apply(h, a);
  const StateVector hb = apply(h, b);
  for (std::uint64_t i = 0; i < combo.dim(); ++i)
    c.expect(std::abs(lhs[i] - (ca * ha[i] + cb * hb[i])) < 1e-12, "apply linearity");

  // Eigenbasis identity of the commutator-form gauge potential at L=4.
  const double lam = 0.5;
  const ModelSchedules m{1.0, 2.0, 1.0};
  const PauliSum h0 =
      tfim_hamiltonian(4, m.h_z(lam), m.h_x(lam), m.J(lam), Boundary::automatic);
  const PauliSum dh = tfim_dlambda(4, m, Boundary::automatic);
  const PauliSum comm_op = cplx{0, 1} * commutator(h0, dh);
  const double beta = solve_variational(h0, dh, {comm_op}).beta[0];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(oracles::dense_sum(h0));
  const Eigen::MatrixXcd a_eig =
      es.eigenvectors().adjoint() * (beta * oracles::dense_sum(comm_op)) * es.eigenvectors();
  const Eigen::MatrixXcd dh_eig =
      es.eigenvectors().adjoint() * oracles::dense_sum(dh) * es.eigenvectors();
  for (int mi = 0; mi < 16; ++mi)
    for (int ni = 0; ni < 16; ++ni) {
      const cplx expected = cplx{0, 1} * beta *
                            (es.eigenvalues()(mi) - es.eigenvalues()(ni)) * dh_eig(mi, ni);
      c.expect(std::abs(a_eig(mi, ni) - expected) < 1e-10, "eigenbasis identity");
    }
  return c;
}

struct Criterion {
  int id;
  std::string name;
  std::function<Check()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "closed-form vs variational alpha (50 random points, 1e-12)",
       closed_form_vs_variational},
      {2, "Brent-optimal lambda_f within 5% of 1/(4 nu) for h_xf in {1,2,4,8}",
       optimal_lambda_f_law},
      {3, "F(tau) vs lambda_f maxima spaced by 1/nu within 5% at h_xf=2",
       oscillation_period},
      {4, "target-fidelity peak inside [0.40, 0.48] tau at lambda_f=2",
       mid_evolution_peak},
      {5, "scaling exponents at h_xf=2 over L=4..12", scaling_strong_field},
      {6, "scaling exponents at h_xf=0.5 over L=4..12", scaling_weak_field},
      {7, "fidelity ordering adiabatic < lcd < lcdlu(fixed) <= lcdlu(opt) at h_xf=0.5",
       weak_field_ordering},
      {8, "rotating frame: Y strings < 1e-12, frame equivalence >= 1 - 1e-8",
       rotating_frame_exactness},
      {9, "Trotter T=20 fidelity >= 0.99 with ~1/T convergence", trotter_fidelity},
      {10, "shot-based energy within 3 sigma and lcdlu ratio >= lcd ratio, L=2..14",
       shot_based_energy},
      {11, "tomography: exact to 1e-10, 400-shot fidelity >= 0.95",
       tomography_reconstruction},
      {12, "property suites: Pauli identities, conservation, eigenbasis identity",
       property_suites},
  };

  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failures = 0;
  for (const Criterion& crit : criteria) {
    if (only != 0 && crit.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = crit.fn();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %2d (%5.1fs): %s%s%s\n", result.ok ? "PASS" : "FAIL",
                crit.id, secs, crit.name.c_str(), result.ok ? "" : " -- ",
                result.ok ? "" : result.detail.c_str());
    std::fflush(stdout);
    failures += result.ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
