#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cdprep/protocols.hpp"
#include "cdprep/statevector.hpp"

namespace cdprep {

enum class GateKind { RZ, RX, RY, RZZ };

/// Rotation gate R_P(theta) = exp(-i theta P / 2); a Hamiltonian term g*P
/// evolved for dt therefore carries angle theta = 2 g dt.
struct Gate {
  GateKind kind = GateKind::RZ;
  int a = 0;
  int b = -1;  // second site for RZZ only
  double angle = 0.0;
};

struct Circuit {
  int L = 0;
  int t_steps = 0;
  std::string spec_digest;
  std::vector<Gate> gates;
};

/// First-order Trotterization with step dt = tau / t_steps and coefficients
/// evaluated at step midpoints; layer order RZ, RX, RY, RZZ with the boundary
/// bond sign folded into the RZZ angle.  Gates with |angle| < 1e-15 are
/// omitted.  For lcdlu the local unitary is appended as explicit rotations.
Circuit synthesize(const ProtocolSpec& spec, int t_steps);

StateVector simulate_circuit(const Circuit& c, const StateVector& psi0);

enum class MeasBasis { Z, X };

struct ShotRecord {
  MeasBasis basis = MeasBasis::Z;
  int L = 0;
  int shots = 0;
  std::uint64_t seed = 0;
  std::map<std::string, int> counts;  // bitstring (site 0 leftmost) -> occurrences
};

/// Projective sampling.  X basis applies a Hadamard per site first, so |->
/// maps to outcome bit 1.  Deterministic given (state, basis, shots, seed).
ShotRecord sample(const StateVector& psi, MeasBasis basis, int shots, std::uint64_t seed);

std::string to_json_string(const ShotRecord& rec);
ShotRecord shot_record_from_json(const std::string& text);

struct EnergyEstimate {
  double energy = 0.0;
  double std_error = 0.0;
};

/// <H_0> = J_f sum_bonds sign <Z Z> + h_xf sum_i <X_i> from one Z-basis and
/// one X-basis record; the error bar propagates the per-shot sample variance
/// of each basis contribution.
EnergyEstimate estimate_energy(const ShotRecord& rec_z, const ShotRecord& rec_x,
                               double h_xf, double J_f, Boundary boundary);

/// Infinite-shot limit of the same estimator (exact basis probabilities).
double exact_basis_energy(const StateVector& psi, double h_xf, double J_f,
                          Boundary boundary);

/// Linear-inversion state tomography over all 3^L Pauli settings, followed
/// by eigenvalue clipping to the nearest PSD unit-trace matrix.  L <= 4.
/// shots_per_setting == 0 uses exact expectations.  The preparation circuit
/// acts on `initial` (default |0...0>).
Eigen::MatrixXcd tomography(const Circuit& prep, int shots_per_setting, std::uint64_t seed,
                            const StateVector* initial = nullptr);

/// <psi| rho |psi>
double density_state_fidelity(const Eigen::MatrixXcd& rho, const StateVector& psi);

enum class CircuitFormat { qasm2, json };

std::string export_circuit(const Circuit& c, CircuitFormat format);
Circuit parse_qasm2(const std::string& text);
Circuit parse_circuit_json(const std::string& text);

}  // namespace cdprep
