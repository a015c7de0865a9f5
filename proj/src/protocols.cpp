#include "cdprep/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

#include "cdprep/io.hpp"
#include "cdprep/optim.hpp"
#include "cdprep/quad.hpp"

namespace cdprep {

namespace {

constexpr double kPi = std::numbers::pi;
// Target ground spaces closer than this are treated as degenerate and the
// target fidelity becomes the projection weight onto the whole space.
constexpr double kTargetDegeneracyGap = 1e-10;

double wrap_angle(double a) {
  // into (-2pi, 2pi]; rotations are 4pi-periodic in the half-angle convention
  a = std::fmod(a, 4.0 * kPi);
  if (a > 2.0 * kPi) a -= 4.0 * kPi;
  if (a <= -2.0 * kPi) a += 4.0 * kPi;
  return a;
}

std::array<cplx, 4> rz_kernel(double a) {
  return {std::polar(1.0, -0.5 * a), cplx{0, 0}, cplx{0, 0}, std::polar(1.0, 0.5 * a)};
}

std::array<cplx, 4> rx_kernel(double a) {
  const double c = std::cos(0.5 * a);
  const cplx ms{0.0, -std::sin(0.5 * a)};
  return {cplx{c, 0}, ms, ms, cplx{c, 0}};
}

std::array<cplx, 4> ry_kernel(double a) {
  const double c = std::cos(0.5 * a);
  const double s = std::sin(0.5 * a);
  return {cplx{c, 0}, cplx{-s, 0}, cplx{s, 0}, cplx{c, 0}};
}

std::array<cplx, 4> matmul2(const std::array<cplx, 4>& a, const std::array<cplx, 4>& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

std::array<cplx, 4> zxz_kernel(const std::array<double, 3>& angles) {
  // R_z(alpha) R_x(theta) R_z(beta)
  return matmul2(rz_kernel(angles[0]), matmul2(rx_kernel(angles[1]), rz_kernel(angles[2])));
}

struct TargetSpace {
  std::vector<StateVector> states;  // ground space within kTargetDegeneracyGap
  double ground_energy = 0.0;

  double projection_fidelity(const StateVector& psi) const {
    double acc = 0.0;
    for (const auto& v : states) acc += fidelity(v, psi);
    return acc;
  }
};

TargetSpace make_target_space(const ProtocolSpec& spec) {
  const PauliSum h_final = base_hamiltonian(spec, spec.tau);
  const int k = static_cast<int>(std::min<std::uint64_t>(
      spec.L <= 10 ? 4 : 3, std::uint64_t{1} << spec.L));
  const SpectrumResult s = low_spectrum(h_final, k);
  TargetSpace t;
  t.ground_energy = s.energies[0];
  for (std::size_t i = 0; i < s.energies.size(); ++i)
    if (s.energies[i] - s.energies[0] < kTargetDegeneracyGap)
      t.states.push_back(s.states[i]);
  return t;
}

StateVector initial_state(const ProtocolSpec& spec) {
  // Exact ground state of H(0) = h_zi sum Z_i for h_zi > 0: all sites in |1>.
  return StateVector::basis_state(spec.L, (std::uint64_t{1} << spec.L) - 1);
}

StateVector evolve_final_state(const ProtocolSpec& spec) {
  const auto h_of_t = [&spec](double t) { return build_hamiltonian(spec, t); };
  Trajectory traj = evolve(h_of_t, initial_state(spec), 0.0, spec.tau, spec.evolve_tol, {});
  StateVector out = std::move(traj.states.back());
  out.normalize();
  return out;
}

}  // namespace

std::string to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::adiabatic: return "adiabatic";
    case ProtocolKind::linear: return "linear";
    case ProtocolKind::lcd: return "lcd";
    case ProtocolKind::lcdlu: return "lcdlu";
  }
  return "?";
}

ProtocolKind protocol_kind_from_string(const std::string& name) {
  if (name == "adiabatic") return ProtocolKind::adiabatic;
  if (name == "linear") return ProtocolKind::linear;
  if (name == "lcd") return ProtocolKind::lcd;
  if (name == "lcdlu") return ProtocolKind::lcdlu;
  throw std::invalid_argument("unknown protocol kind '" + name + "'");
}

LocalUnitaryParams LocalUnitaryParams::fixed_x(double theta) {
  return uniform(0.0, theta, 0.0);
}

LocalUnitaryParams LocalUnitaryParams::uniform(double alpha, double theta, double beta) {
  return {{{wrap_angle(alpha), wrap_angle(theta), wrap_angle(beta)}}};
}

LocalUnitaryParams LocalUnitaryParams::per_site(std::vector<std::array<double, 3>> triples) {
  if (triples.empty()) throw std::invalid_argument("LocalUnitaryParams: empty triple list");
  for (auto& t : triples)
    t = {wrap_angle(t[0]), wrap_angle(t[1]), wrap_angle(t[2])};
  return {std::move(triples)};
}

LocalUnitaryParams fixed_x_pi4() { return LocalUnitaryParams::fixed_x(kPi / 4.0); }

void ProtocolSpec::validate() const {
  if (L < 2) throw std::invalid_argument("ProtocolSpec: L must be >= 2");
  if (!(tau > 0.0)) throw std::invalid_argument("ProtocolSpec: tau must be positive");
  if (h_xf < 0.0) throw std::invalid_argument("ProtocolSpec: h_xf must be >= 0");
  if (!(h_zi > 0.0)) throw std::invalid_argument("ProtocolSpec: h_zi must be positive");
  if (kind == ProtocolKind::lcdlu && !lu)
    throw std::invalid_argument("ProtocolSpec: lcdlu requires local-unitary parameters");
  if (lu && !lu->is_uniform() && lu->zxz.size() != static_cast<std::size_t>(L))
    throw std::invalid_argument("ProtocolSpec: per-site LU needs exactly L triples");
  if (sample_count < 2) throw std::invalid_argument("ProtocolSpec: need >= 2 sample times");
  if (!(evolve_tol > 0.0)) throw std::invalid_argument("ProtocolSpec: tol must be positive");
}

std::string to_json_string(const ProtocolSpec& spec) {
  nlohmann::json j;
  j["L"] = spec.L;
  j["h_zi"] = spec.h_zi;
  j["h_xf"] = spec.h_xf;
  j["J_f"] = spec.J_f;
  j["tau"] = spec.tau;
  switch (resolve_boundary(spec.boundary, spec.L)) {
    case Boundary::periodic: j["boundary"] = "periodic"; break;
    case Boundary::antiperiodic: j["boundary"] = "antiperiodic"; break;
    default: j["boundary"] = "auto"; break;
  }
  j["kind"] = to_string(spec.kind);
  j["lambda_f"] = spec.lambda_f;
  if (spec.lu) {
    nlohmann::json lu = nlohmann::json::array();
    for (const auto& t : spec.lu->zxz) lu.push_back({t[0], t[1], t[2]});
    j["lu_zxz"] = lu;
  } else {
    j["lu_zxz"] = nullptr;
  }
  j["sample_count"] = spec.sample_count;
  j["evolve_tol"] = spec.evolve_tol;
  return j.dump();
}

PauliSum base_hamiltonian(const ProtocolSpec& spec, double t) {
  const ModelSchedules m = spec.model();
  if (spec.kind == ProtocolKind::linear) {
    const double s = t / spec.tau;
    return tfim_hamiltonian(spec.L, m.h_z(s), m.h_x(s), m.J(s), spec.boundary);
  }
  const double lam = spec.sweep().lambda(t);
  return tfim_hamiltonian(spec.L, m.h_z(lam), m.h_x(lam), m.J(lam), spec.boundary);
}

PauliSum build_hamiltonian(const ProtocolSpec& spec, double t) {
  spec.validate();
  if (t < -1e-12 || t > spec.tau * (1.0 + 1e-12))
    throw std::out_of_range("build_hamiltonian: t outside [0, tau]");
  PauliSum h = base_hamiltonian(spec, t);
  if (spec.kind == ProtocolKind::lcd || spec.kind == ProtocolKind::lcdlu) {
    const SweepFunction sweep = spec.sweep();
    const double dlam = sweep.dlambda(t);
    if (dlam != 0.0 && spec.lambda_f != 0.0) {
      const double amp =
          spec.lambda_f * dlam * alpha_first_order(sweep.lambda(t), spec.model());
      h += uniform_sum(spec.L, 'Y', amp);
    }
  }
  return h;
}

RunResult run(const ProtocolSpec& spec) {
  spec.validate();
  const TargetSpace target = make_target_space(spec);

  std::vector<double> samples(static_cast<std::size_t>(spec.sample_count));
  for (int i = 0; i < spec.sample_count; ++i)
    samples[static_cast<std::size_t>(i)] =
        spec.tau * static_cast<double>(i) / static_cast<double>(spec.sample_count - 1);

  const auto h_of_t = [&spec](double t) { return build_hamiltonian(spec, t); };
  Trajectory traj =
      evolve(h_of_t, initial_state(spec), 0.0, spec.tau, spec.evolve_tol, samples);

  RunResult out;
  out.times = traj.times;
  out.norm_drift = traj.norm_drift;
  out.max_norm_drift = traj.max_norm_drift;
  out.lambda_f = spec.lambda_f;

  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    traj.states[i].normalize();
    out.f_target.push_back(target.projection_fidelity(traj.states[i]));
    if (spec.track_instantaneous) {
      const PauliSum h_base = base_hamiltonian(spec, traj.times[i]);
      out.f_instantaneous.push_back(
          fidelity(ground_state(h_base).state, traj.states[i]));
      out.energy.push_back(expectation(h_base, traj.states[i]));
    }
  }

  out.f_pre_lu = out.f_target.back();
  StateVector final_state = std::move(traj.states.back());
  if (spec.kind == ProtocolKind::lcdlu) final_state = apply_lu(final_state, *spec.lu);
  out.f_final = (spec.kind == ProtocolKind::lcdlu)
                    ? target.projection_fidelity(final_state)
                    : out.f_pre_lu;

  const PauliSum h_final = base_hamiltonian(spec, spec.tau);
  out.final_energy = expectation(h_final, final_state);
  out.ground_energy = target.ground_energy;
  out.energy_ratio = out.final_energy / out.ground_energy;
  out.final_state = std::move(final_state);
  return out;
}

double theta_y(const ProtocolSpec& spec, double t) {
  if (t < 0.0 || t > spec.tau * (1.0 + 1e-12))
    throw std::out_of_range("theta_y: t outside [0, tau]");
  if (t == 0.0 || spec.lambda_f == 0.0) return 0.0;
  const SweepFunction sweep = spec.sweep();
  const ModelSchedules m = spec.model();
  const auto integrand = [&](double s) {
    return sweep.dlambda(s) * alpha_first_order(sweep.lambda(s), m);
  };
  return 2.0 * spec.lambda_f * integrate(integrand, 0.0, t, 1e-12);
}

PauliSum rotating_frame_h(const ProtocolSpec& spec, double t) {
  if (spec.kind != ProtocolKind::lcd && spec.kind != ProtocolKind::lcdlu)
    throw std::invalid_argument("rotating_frame_h: requires an lcd-driven protocol");
  const double theta = theta_y(spec, t);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const ModelSchedules m = spec.model();
  const double lam = spec.sweep().lambda(t);
  const double hz = m.h_z(lam);
  const double hx = m.h_x(lam);
  const double J = m.J(lam);

  PauliSum h(spec.L);
  for (int i = 0; i < spec.L; ++i) {
    h.add(PauliString::single(spec.L, i, 'X'), hx * c - hz * s);
    h.add(PauliString::single(spec.L, i, 'Z'), hz * c + hx * s);
  }
  for (const Bond& bond : chain_bonds(spec.L, spec.boundary)) {
    const double Jb = J * bond.sign;
    const auto za = PauliString::single(spec.L, bond.a, 'Z');
    const auto zb = PauliString::single(spec.L, bond.b, 'Z');
    const auto xa = PauliString::single(spec.L, bond.a, 'X');
    const auto xb = PauliString::single(spec.L, bond.b, 'X');
    h.add(multiply(za, zb).second, Jb * c * c);
    h.add(multiply(za, xb).second, -Jb * c * s);
    h.add(multiply(xa, zb).second, -Jb * c * s);
    h.add(multiply(xa, xb).second, Jb * s * s);
  }
  return h;
}

StateVector apply_uniform_y(const StateVector& psi, double angle) {
  StateVector out = psi;
  const auto kernel = ry_kernel(angle);
  for (int i = 0; i < psi.size(); ++i) apply_one_site(out, i, kernel);
  return out;
}

StateVector apply_lu(const StateVector& psi, const LocalUnitaryParams& params) {
  const std::size_t n = params.zxz.size();
  if (n != 1 && n != static_cast<std::size_t>(psi.size()))
    throw std::invalid_argument("apply_lu: expected 1 or L angle triples, got " +
                                std::to_string(n));
  StateVector out = psi;
  if (n == 1) {
    const auto kernel = zxz_kernel(params.zxz[0]);
    for (int i = 0; i < psi.size(); ++i) apply_one_site(out, i, kernel);
  } else {
    for (int i = 0; i < psi.size(); ++i)
      apply_one_site(out, i, zxz_kernel(params.zxz[static_cast<std::size_t>(i)]));
  }
  return out;
}

double symmetry_expectation(const StateVector& psi) {
  const std::uint64_t full = psi.dim() - 1;
  cplx acc{0, 0};
  for (std::uint64_t b = 0; b < psi.dim(); ++b)
    acc += std::conj(psi[b ^ full]) * psi[b];
  const double parity = (psi.size() % 2 == 0) ? 1.0 : -1.0;
  return parity * acc.real();
}

namespace {

struct LcdObjective {
  ProtocolSpec spec;  // kind forced to lcd, cheap sampling
  TargetSpace target;

  explicit LcdObjective(const ProtocolSpec& base) : spec(base) {
    spec.kind = ProtocolKind::lcd;
    spec.lu.reset();
    spec.sample_count = 2;
    spec.track_instantaneous = false;
    spec.validate();
    target = make_target_space(spec);
  }

  StateVector final_state(double lambda_f) const {
    ProtocolSpec s = spec;
    s.lambda_f = lambda_f;
    return evolve_final_state(s);
  }

  double final_fidelity(double lambda_f) const {
    return target.projection_fidelity(final_state(lambda_f));
  }
};

}  // namespace

LambdaFOptimum optimize_lambda_f(const ProtocolSpec& spec,
                                 std::optional<std::pair<double, double>> bracket) {
  const LcdObjective obj(spec);
  double lo, hi;
  if (bracket) {
    lo = bracket->first;
    hi = bracket->second;
    if (!(hi > lo)) throw std::invalid_argument("optimize_lambda_f: bad bracket");
  } else {
    const double guess = lambda_f_opt(spec.model(), spec.tau);
    lo = 0.5 * guess;
    hi = 1.5 * guess;
  }
  const auto negf = [&obj](double x) { return 1.0 - obj.final_fidelity(x); };

  constexpr double kXTol = 1e-4;
  BrentResult best = brent_minimize(negf, lo, hi, kXTol);
  bool fallback = false;
  if (best.x - lo < 2.0 * kXTol || hi - best.x < 2.0 * kXTol) {
    // Pinned to a bracket edge: the bracket missed the interior optimum.
    fallback = true;
    constexpr int kScan = 33;
    std::vector<double> xs(kScan), fs(kScan);
    int imin = 0;
    for (int i = 0; i < kScan; ++i) {
      xs[static_cast<std::size_t>(i)] =
          lo + (hi - lo) * static_cast<double>(i) / (kScan - 1);
      fs[static_cast<std::size_t>(i)] = negf(xs[static_cast<std::size_t>(i)]);
      if (fs[static_cast<std::size_t>(i)] < fs[static_cast<std::size_t>(imin)]) imin = i;
    }
    const double a = xs[static_cast<std::size_t>(std::max(0, imin - 1))];
    const double b = xs[static_cast<std::size_t>(std::min(kScan - 1, imin + 1))];
    if (b > a) {
      const BrentResult refined = brent_minimize(negf, a, b, kXTol);
      if (refined.f < best.f) best = refined;
    }
    if (fs[static_cast<std::size_t>(imin)] < best.f)
      best = {xs[static_cast<std::size_t>(imin)], fs[static_cast<std::size_t>(imin)], 0};
  }
  return {best.x, 1.0 - best.f, fallback};
}

std::string to_string(LuMode mode) {
  switch (mode) {
    case LuMode::general: return "general";
    case LuMode::uniform: return "uniform";
    case LuMode::x_only: return "x_only";
    case LuMode::z_only: return "z_only";
    case LuMode::y_only: return "y_only";
  }
  return "?";
}

LuOptimum optimize_lu(const ProtocolSpec& spec, LuMode mode) {
  const LcdObjective obj(spec);
  const StateVector psi = obj.final_state(spec.lambda_f);

  const auto lu_fidelity = [&](const LocalUnitaryParams& params) {
    return obj.target.projection_fidelity(apply_lu(psi, params));
  };

  if (mode == LuMode::general || mode == LuMode::uniform) {
    const std::size_t sites =
        (mode == LuMode::general) ? static_cast<std::size_t>(spec.L) : 1;
    const auto params_of = [&](const std::vector<double>& x) {
      std::vector<std::array<double, 3>> triples(sites);
      for (std::size_t i = 0; i < sites; ++i)
        triples[i] = {x[3 * i], x[3 * i + 1], x[3 * i + 2]};
      return (sites == 1) ? LocalUnitaryParams::uniform(x[0], x[1], x[2])
                          : LocalUnitaryParams::per_site(std::move(triples));
    };
    std::vector<double> x0;
    for (std::size_t i = 0; i < sites; ++i) {
      x0.push_back(0.0);
      x0.push_back(kPi / 4.0);
      x0.push_back(0.0);
    }
    NelderMeadOptions opts;
    opts.x_tol = 1e-6;
    opts.max_evals = 4000 * static_cast<int>(x0.size());
    const NelderMeadResult nm = nelder_mead(
        [&](const std::vector<double>& x) { return 1.0 - lu_fidelity(params_of(x)); }, x0,
        opts);
    return {params_of(nm.x), 1.0 - nm.f, nm.stagnated};
  }

  const auto params_of_angle = [&](double theta) {
    switch (mode) {
      case LuMode::x_only: return LocalUnitaryParams::uniform(0.0, theta, 0.0);
      case LuMode::z_only: return LocalUnitaryParams::uniform(theta, 0.0, 0.0);
      default: return LocalUnitaryParams::uniform(kPi / 2.0, theta, -kPi / 2.0);
    }
  };
  const auto negf = [&](double theta) { return 1.0 - lu_fidelity(params_of_angle(theta)); };

  // Coarse scan over a full period, then Brent around the best bracket.
  constexpr int kScan = 33;
  int imin = 0;
  std::vector<double> xs(kScan), fs(kScan);
  for (int i = 0; i < kScan; ++i) {
    xs[static_cast<std::size_t>(i)] = -kPi + 2.0 * kPi * static_cast<double>(i) / (kScan - 1);
    fs[static_cast<std::size_t>(i)] = negf(xs[static_cast<std::size_t>(i)]);
    if (fs[static_cast<std::size_t>(i)] < fs[static_cast<std::size_t>(imin)]) imin = i;
  }
  const double a = xs[static_cast<std::size_t>(std::max(0, imin - 1))];
  const double b = xs[static_cast<std::size_t>(std::min(kScan - 1, imin + 1))];
  BrentResult best = brent_minimize(negf, a, b, 1e-6);
  if (fs[static_cast<std::size_t>(imin)] < best.f)
    best = {xs[static_cast<std::size_t>(imin)], fs[static_cast<std::size_t>(imin)], 0};
  return {params_of_angle(best.x), 1.0 - best.f, false};
}

ScalingFit fit_exponential(const std::vector<int>& sizes,
                           const std::vector<double>& fidelities) {
  if (sizes.size() != fidelities.size())
    throw std::invalid_argument("fit_exponential: size/fidelity length mismatch");
  if (sizes.size() < 2)
    throw std::invalid_argument("fit_exponential: need at least two sizes");
  if (std::adjacent_find(sizes.begin(), sizes.end(), std::not_equal_to<>()) == sizes.end())
    throw std::invalid_argument("fit_exponential: sizes are all equal");
  std::vector<double> y;
  y.reserve(fidelities.size());
  for (double f : fidelities) {
    if (!(f > 0.0))
      throw std::invalid_argument("fit_exponential: fidelities must be positive");
    y.push_back(std::log2(f));
  }
  const double n = static_cast<double>(sizes.size());
  double sl = 0.0, sy = 0.0, sll = 0.0, sly = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    sl += sizes[i];
    sy += y[i];
    sll += static_cast<double>(sizes[i]) * sizes[i];
    sly += sizes[i] * y[i];
  }
  const double slope = (n * sly - sl * sy) / (n * sll - sl * sl);
  const double intercept = (sy - slope * sl) / n;
  ScalingFit fit;
  fit.c = -slope;
  fit.a = intercept;
  for (std::size_t i = 0; i < sizes.size(); ++i)
    fit.residuals.push_back(y[i] - (slope * sizes[i] + intercept));
  return fit;
}

ScalingResult scaling_experiment(const ProtocolSpec& base, const std::vector<int>& sizes,
                                 int optimize_up_to, bool include_optimized_lu,
                                 LuMode opt_lu_mode) {
  std::vector<int> order = sizes;
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  if (order.empty()) throw std::invalid_argument("scaling_experiment: empty size list");

  ScalingResult out;
  const LocalUnitaryParams lu = base.lu.value_or(fixed_x_pi4());
  double lambda_cur = std::numeric_limits<double>::quiet_NaN();

  for (int L : order) {
    ProtocolSpec spec = base;
    spec.L = L;
    spec.kind = ProtocolKind::lcd;
    spec.lu.reset();
    spec.sample_count = 2;
    spec.track_instantaneous = false;

    if (L <= optimize_up_to) {
      lambda_cur = optimize_lambda_f(spec).lambda_f;
    } else if (std::isnan(lambda_cur)) {
      lambda_cur = lambda_f_opt(spec.model(), spec.tau);
    }
    spec.lambda_f = lambda_cur;

    const LcdObjective obj(spec);
    const StateVector psi_adiabatic = obj.final_state(0.0);
    const StateVector psi_lcd = obj.final_state(lambda_cur);

    out.sizes.push_back(L);
    out.lambda_f.push_back(lambda_cur);
    out.fidelity["adiabatic"].push_back(obj.target.projection_fidelity(psi_adiabatic));
    out.fidelity["lcd"].push_back(obj.target.projection_fidelity(psi_lcd));
    out.fidelity["lcdlu"].push_back(obj.target.projection_fidelity(apply_lu(psi_lcd, lu)));
    if (include_optimized_lu) {
      ProtocolSpec lu_spec = spec;
      lu_spec.lambda_f = lambda_cur;
      out.fidelity["lcdlu_opt"].push_back(optimize_lu(lu_spec, opt_lu_mode).fidelity);
    }
  }
  for (const auto& [name, values] : out.fidelity)
    out.fit[name] = fit_exponential(out.sizes, values);
  return out;
}

void write_trajectory_csv(const std::string& path, const RunResult& result) {
  if (result.f_instantaneous.size() != result.times.size() ||
      result.energy.size() != result.times.size())
    throw std::invalid_argument(
        "write_trajectory_csv: run was not tracked (set track_instantaneous)");
  CsvWriter csv(path, {"t", "F_instantaneous", "F_target", "norm_drift", "energy"});
  for (std::size_t i = 0; i < result.times.size(); ++i)
    csv.row({result.times[i], result.f_instantaneous[i], result.f_target[i],
             result.norm_drift[i], result.energy[i]});
}

}  // namespace cdprep
