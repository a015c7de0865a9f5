#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdprep/pauli.hpp"
#include "cdprep/schedules.hpp"
#include "cdprep/statevector.hpp"

namespace cdprep {

enum class ProtocolKind { adiabatic, linear, lcd, lcdlu };

std::string to_string(ProtocolKind kind);
ProtocolKind protocol_kind_from_string(const std::string& name);

/// Product of single-site rotations R_z(alpha) R_x(theta) R_z(beta), either
/// one uniform triple or one triple per site.  Angles are stored wrapped into
/// (-2pi, 2pi].
struct LocalUnitaryParams {
  std::vector<std::array<double, 3>> zxz;  // {alpha, theta, beta}

  static LocalUnitaryParams fixed_x(double theta);
  static LocalUnitaryParams uniform(double alpha, double theta, double beta);
  static LocalUnitaryParams per_site(std::vector<std::array<double, 3>> triples);

  bool is_uniform() const { return zxz.size() == 1; }
};

/// The paper-regime default second step: global X rotation by pi/4.
LocalUnitaryParams fixed_x_pi4();

struct ProtocolSpec {
  int L = 4;
  double h_zi = 1.0;
  double h_xf = 2.0;
  double J_f = 1.0;
  double tau = 1.0;
  Boundary boundary = Boundary::automatic;
  ProtocolKind kind = ProtocolKind::lcd;
  double lambda_f = 0.0;
  std::optional<LocalUnitaryParams> lu;
  int sample_count = 201;
  double evolve_tol = 1e-8;
  bool track_instantaneous = true;

  void validate() const;
  ModelSchedules model() const { return {h_zi, h_xf, J_f}; }
  SweepFunction sweep() const { return SweepFunction(tau); }
};

std::string to_json_string(const ProtocolSpec& spec);

struct RunResult {
  std::vector<double> times;
  std::vector<double> f_instantaneous;  // empty when tracking is off
  std::vector<double> f_target;
  std::vector<double> norm_drift;
  std::vector<double> energy;           // <H_base(t)>, empty when tracking is off
  StateVector final_state = StateVector(1);
  double f_final = 0.0;    // post-LU for lcdlu
  double f_pre_lu = 0.0;   // equals f_final for single-step protocols
  double final_energy = 0.0;
  double ground_energy = 0.0;
  double energy_ratio = 0.0;
  double lambda_f = 0.0;
  double max_norm_drift = 0.0;
};

/// Drive Hamiltonian at time t (with the counterdiabatic Y term for lcd and
/// lcdlu; the second LU step of lcdlu is applied after the evolution, not
/// here).
PauliSum build_hamiltonian(const ProtocolSpec& spec, double t);
/// Same without the counterdiabatic term: the instantaneous reference whose
/// ground state defines F(t).
PauliSum base_hamiltonian(const ProtocolSpec& spec, double t);

RunResult run(const ProtocolSpec& spec);

/// Accumulated uniform Y-rotation angle 2 lambda_f \int_0^t dlambda/dt alpha.
double theta_y(const ProtocolSpec& spec, double t);
/// Effective Hamiltonian in the frame rotating with the counterdiabatic
/// drive; contains no Y strings by construction.
PauliSum rotating_frame_h(const ProtocolSpec& spec, double t);
/// Frame map back to the lab: psi_lab(t) = U_y(t) psi_rot(t).
StateVector apply_uniform_y(const StateVector& psi, double angle);

StateVector apply_lu(const StateVector& psi, const LocalUnitaryParams& params);

/// <psi| prod_i (-X_i) |psi>, the Z2 symmetry of the target Hamiltonian.
double symmetry_expectation(const StateVector& psi);

struct LambdaFOptimum {
  double lambda_f = 0.0;
  double fidelity = 0.0;
  bool used_scan_fallback = false;
};

/// Brent maximization of the final target fidelity of the LCD protocol over
/// lambda_f (x-tolerance 1e-4).  Default bracket is [0.5, 1.5]/(4 nu); if the
/// optimum pins to a bracket edge, falls back to a 33-point scan plus a local
/// Brent refinement.
LambdaFOptimum optimize_lambda_f(const ProtocolSpec& spec,
                                 std::optional<std::pair<double, double>> bracket = {});

enum class LuMode { general, uniform, x_only, z_only, y_only };

std::string to_string(LuMode mode);

struct LuOptimum {
  LocalUnitaryParams params;
  double fidelity = 0.0;
  bool stagnated = false;
};

/// Optimizes the post-evolution local unitary for the LCD state of `spec`
/// (spec.lambda_f as given).  general/uniform run a restarted simplex from
/// the fixed X(pi/4) point; the single-angle modes use a scan plus Brent.
LuOptimum optimize_lu(const ProtocolSpec& spec, LuMode mode);

struct ScalingFit {
  double c = 0.0;
  double a = 0.0;
  std::vector<double> residuals;  // log2 F - (-c L + a)
};

/// Ordinary least squares of log2 F = -c L + a.
ScalingFit fit_exponential(const std::vector<int>& sizes, const std::vector<double>& fidelities);

struct ScalingResult {
  std::vector<int> sizes;
  std::vector<double> lambda_f;                       // per size
  std::map<std::string, std::vector<double>> fidelity;  // by protocol name
  std::map<std::string, ScalingFit> fit;
};

/// Runs adiabatic / lcd / lcdlu (fixed X pi/4) per system size with the
/// Brent-optimal lambda_f, re-optimized up to optimize_up_to sites and reused
/// beyond that.  include_optimized_lu adds an "lcdlu_opt" series; the uniform
/// simplex is the default there since the translation-invariant optimum
/// coincides with the general one on these chains.
ScalingResult scaling_experiment(const ProtocolSpec& base, const std::vector<int>& sizes,
                                 int optimize_up_to = 11, bool include_optimized_lu = false,
                                 LuMode opt_lu_mode = LuMode::uniform);

/// Trajectory CSV: t, F_instantaneous, F_target, norm_drift, energy.
void write_trajectory_csv(const std::string& path, const RunResult& result);

}  // namespace cdprep
