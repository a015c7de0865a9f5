#include "cdprep/trotter.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "cdprep/io.hpp"

namespace cdprep {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleEps = 1e-15;
constexpr double kInvSqrt2 = 0.70710678118654752440;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string digest_spec(const ProtocolSpec& spec) {
  // FNV-1a over the canonical JSON form; stable across platforms.
  const std::string text = to_json_string(spec);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string bits_to_string(std::uint64_t bits, int length) {
  std::string s(static_cast<std::size_t>(length), '0');
  for (int i = 0; i < length; ++i)
    if ((bits >> i) & 1u) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

std::uint64_t string_to_bits(const std::string& s) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] == '1') bits |= std::uint64_t{1} << i;
  return bits;
}

const char* gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::RZ: return "rz";
    case GateKind::RX: return "rx";
    case GateKind::RY: return "ry";
    case GateKind::RZZ: return "rzz";
  }
  return "?";
}

void check_gate(const Gate& g, int length) {
  if (g.a < 0 || g.a >= length)
    throw std::invalid_argument("gate site out of range");
  if (g.kind == GateKind::RZZ) {
    if (g.b < 0 || g.b >= length || g.b == g.a)
      throw std::invalid_argument("RZZ needs two distinct sites in range");
  } else if (g.b != -1) {
    throw std::invalid_argument("single-qubit gate with a second site");
  }
}

void append_lu_gates(Circuit& c, const LocalUnitaryParams& lu) {
  // LU = R_z(alpha) R_x(theta) R_z(beta) applied right to left.
  for (int i = 0; i < c.L; ++i) {
    const auto& t = lu.is_uniform() ? lu.zxz[0] : lu.zxz[static_cast<std::size_t>(i)];
    if (std::abs(t[2]) >= kAngleEps) c.gates.push_back({GateKind::RZ, i, -1, t[2]});
    if (std::abs(t[1]) >= kAngleEps) c.gates.push_back({GateKind::RX, i, -1, t[1]});
    if (std::abs(t[0]) >= kAngleEps) c.gates.push_back({GateKind::RZ, i, -1, t[0]});
  }
}

}  // namespace

Circuit synthesize(const ProtocolSpec& spec, int t_steps) {
  spec.validate();
  if (t_steps < 1) throw std::invalid_argument("synthesize: t_steps must be >= 1");

  const ModelSchedules m = spec.model();
  const SweepFunction sweep = spec.sweep();
  const auto bonds = chain_bonds(spec.L, spec.boundary);
  const double dt = spec.tau / t_steps;
  const bool driven = spec.kind == ProtocolKind::lcd || spec.kind == ProtocolKind::lcdlu;
  const bool linear = spec.kind == ProtocolKind::linear;

  Circuit c{spec.L, t_steps, digest_spec(spec), {}};
  for (int step = 0; step < t_steps; ++step) {
    const double tm = (step + 0.5) * dt;
    const double lam = linear ? tm / spec.tau : sweep.lambda(tm);
    const double hz = m.h_z(lam);
    const double hx = m.h_x(lam);
    const double J = m.J(lam);
    const double y = driven && spec.lambda_f != 0.0
                         ? spec.lambda_f * sweep.dlambda(tm) * alpha_first_order(lam, m)
                         : 0.0;

    if (std::abs(2.0 * hz * dt) >= kAngleEps)
      for (int i = 0; i < spec.L; ++i) c.gates.push_back({GateKind::RZ, i, -1, 2.0 * hz * dt});
    if (std::abs(2.0 * hx * dt) >= kAngleEps)
      for (int i = 0; i < spec.L; ++i) c.gates.push_back({GateKind::RX, i, -1, 2.0 * hx * dt});
    if (std::abs(2.0 * y * dt) >= kAngleEps)
      for (int i = 0; i < spec.L; ++i) c.gates.push_back({GateKind::RY, i, -1, 2.0 * y * dt});
    if (std::abs(2.0 * J * dt) >= kAngleEps)
      for (const Bond& b : bonds)
        c.gates.push_back({GateKind::RZZ, b.a, b.b, 2.0 * J * b.sign * dt});
  }
  if (spec.kind == ProtocolKind::lcdlu) append_lu_gates(c, *spec.lu);
  return c;
}

StateVector simulate_circuit(const Circuit& c, const StateVector& psi0) {
  if (c.L != psi0.size())
    throw std::invalid_argument("simulate_circuit: circuit/state size mismatch");
  StateVector psi = psi0;
  for (const Gate& g : c.gates) {
    check_gate(g, c.L);
    const double half = 0.5 * g.angle;
    switch (g.kind) {
      case GateKind::RZ:
        apply_one_site(psi, g.a,
                       {std::polar(1.0, -half), cplx{0, 0}, cplx{0, 0}, std::polar(1.0, half)});
        break;
      case GateKind::RX: {
        const double cth = std::cos(half);
        const cplx ms{0.0, -std::sin(half)};
        apply_one_site(psi, g.a, {cplx{cth, 0}, ms, ms, cplx{cth, 0}});
        break;
      }
      case GateKind::RY: {
        const double cth = std::cos(half);
        const double sth = std::sin(half);
        apply_one_site(psi, g.a, {cplx{cth, 0}, cplx{-sth, 0}, cplx{sth, 0}, cplx{cth, 0}});
        break;
      }
      case GateKind::RZZ: {
        const std::uint64_t ma = std::uint64_t{1} << g.a;
        const std::uint64_t mb = std::uint64_t{1} << g.b;
        const cplx even = std::polar(1.0, -half);  // aligned bits, ZZ eigenvalue +1
        const cplx odd = std::polar(1.0, half);
        auto& amp = psi.amplitudes();
        for (std::uint64_t bidx = 0; bidx < psi.dim(); ++bidx) {
          const bool aligned = ((bidx & ma) != 0) == ((bidx & mb) != 0);
          amp[bidx] *= aligned ? even : odd;
        }
        break;
      }
    }
  }
  return psi;
}

namespace {

std::vector<double> basis_probabilities(const StateVector& psi, MeasBasis basis) {
  StateVector rotated = psi;
  if (basis == MeasBasis::X) {
    const std::array<cplx, 4> hadamard = {cplx{kInvSqrt2, 0}, cplx{kInvSqrt2, 0},
                                          cplx{kInvSqrt2, 0}, cplx{-kInvSqrt2, 0}};
    for (int i = 0; i < psi.size(); ++i) apply_one_site(rotated, i, hadamard);
  }
  std::vector<double> p(rotated.dim());
  for (std::uint64_t b = 0; b < rotated.dim(); ++b) p[b] = std::norm(rotated[b]);
  return p;
}

std::map<std::string, int> draw_counts(const std::vector<double>& probs, int length,
                                       int shots, std::uint64_t seed) {
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf[i] = acc;
  }
  // mt19937_64 output is fully specified, so records reproduce across
  // platforms; uniform doubles take the top 53 bits.
  std::mt19937_64 rng(seed);
  std::map<std::string, int> counts;
  for (int s = 0; s < shots; ++s) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::uint64_t idx = static_cast<std::uint64_t>(
        std::min<std::ptrdiff_t>(std::distance(cdf.begin(), it),
                                 static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    ++counts[bits_to_string(idx, length)];
  }
  return counts;
}

}  // namespace

ShotRecord sample(const StateVector& psi, MeasBasis basis, int shots, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("sample: shots must be >= 1");
  ShotRecord rec;
  rec.basis = basis;
  rec.L = psi.size();
  rec.shots = shots;
  rec.seed = seed;
  rec.counts = draw_counts(basis_probabilities(psi, basis), psi.size(), shots, seed);
  return rec;
}

std::string to_json_string(const ShotRecord& rec) {
  nlohmann::json j;
  j["basis"] = rec.basis == MeasBasis::Z ? "Z" : "X";
  j["shots"] = rec.shots;
  j["seed"] = rec.seed;
  j["counts"] = nlohmann::json::object();
  for (const auto& [bits, n] : rec.counts) j["counts"][bits] = n;
  return j.dump();
}

ShotRecord shot_record_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ShotRecord rec;
  const std::string basis = j.at("basis").get<std::string>();
  if (basis == "Z") rec.basis = MeasBasis::Z;
  else if (basis == "X") rec.basis = MeasBasis::X;
  else throw std::invalid_argument("shot record: bad basis '" + basis + "'");
  rec.shots = j.at("shots").get<int>();
  rec.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& [bits, n] : j.at("counts").items()) {
    rec.counts[bits] = n.get<int>();
    rec.L = static_cast<int>(bits.size());
  }
  return rec;
}

namespace {

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // of the per-shot value
};

MeanVar shot_statistics(const ShotRecord& rec,
                        const std::function<double(std::uint64_t)>& value) {
  double total = 0.0;
  double sum = 0.0;
  for (const auto& [bits, n] : rec.counts) {
    total += n;
    sum += n * value(string_to_bits(bits));
  }
  if (total <= 0) throw std::invalid_argument("shot record has no counts");
  const double mean = sum / total;
  double ss = 0.0;
  for (const auto& [bits, n] : rec.counts) {
    const double d = value(string_to_bits(bits)) - mean;
    ss += n * d * d;
  }
  return {mean, total > 1 ? ss / (total - 1.0) : 0.0};
}

}  // namespace

EnergyEstimate estimate_energy(const ShotRecord& rec_z, const ShotRecord& rec_x,
                               double h_xf, double J_f, Boundary boundary) {
  if (rec_z.basis != MeasBasis::Z || rec_x.basis != MeasBasis::X)
    throw std::invalid_argument("estimate_energy: pass a Z record then an X record");
  if (rec_z.L != rec_x.L) throw std::invalid_argument("estimate_energy: size mismatch");
  const int L = rec_z.L;
  const auto bonds = chain_bonds(L, boundary);

  const auto zz_energy = [&](std::uint64_t bits) {
    double e = 0.0;
    for (const Bond& b : bonds) {
      const bool aligned = (((bits >> b.a) ^ (bits >> b.b)) & 1u) == 0;
      e += b.sign * (aligned ? 1.0 : -1.0);
    }
    return J_f * e;
  };
  const auto x_energy = [&](std::uint64_t bits) {
    // Outcome bit 1 in the X basis is the -1 eigenvalue of X.
    return h_xf * (L - 2.0 * std::popcount(bits));
  };

  const MeanVar z = shot_statistics(rec_z, zz_energy);
  const MeanVar x = shot_statistics(rec_x, x_energy);
  return {z.mean + x.mean,
          std::sqrt(z.variance / rec_z.shots + x.variance / rec_x.shots)};
}

double exact_basis_energy(const StateVector& psi, double h_xf, double J_f,
                          Boundary boundary) {
  const int L = psi.size();
  const auto bonds = chain_bonds(L, boundary);
  const std::vector<double> pz = basis_probabilities(psi, MeasBasis::Z);
  const std::vector<double> px = basis_probabilities(psi, MeasBasis::X);
  double e = 0.0;
  for (std::uint64_t b = 0; b < psi.dim(); ++b) {
    double ez = 0.0;
    for (const Bond& bd : bonds) {
      const bool aligned = (((b >> bd.a) ^ (b >> bd.b)) & 1u) == 0;
      ez += bd.sign * (aligned ? 1.0 : -1.0);
    }
    e += pz[b] * J_f * ez;
    e += px[b] * h_xf * (L - 2.0 * std::popcount(b));
  }
  return e;
}

Eigen::MatrixXcd tomography(const Circuit& prep, int shots_per_setting, std::uint64_t seed,
                            const StateVector* initial) {
  if (prep.L > 4)
    throw std::domain_error("tomography: limited to L <= 4 (3^L settings)");
  if (shots_per_setting < 0)
    throw std::invalid_argument("tomography: negative shots_per_setting");
  const int L = prep.L;
  const std::uint64_t dim = std::uint64_t{1} << L;

  const StateVector psi =
      simulate_circuit(prep, initial ? *initial : StateVector::basis_state(L, 0));

  // Per-site rotations mapping the measured axis onto Z: X -> H, Y -> H S^dag.
  const std::array<cplx, 4> rot_x = {cplx{kInvSqrt2, 0}, cplx{kInvSqrt2, 0},
                                     cplx{kInvSqrt2, 0}, cplx{-kInvSqrt2, 0}};
  const std::array<cplx, 4> rot_y = {cplx{kInvSqrt2, 0}, cplx{0, -kInvSqrt2},
                                     cplx{kInvSqrt2, 0}, cplx{0, kInvSqrt2}};

  int settings = 1;
  for (int i = 0; i < L; ++i) settings *= 3;
  constexpr char kAxes[3] = {'X', 'Y', 'Z'};

  PauliSum accum(L);
  std::map<std::string, std::pair<double, int>> estimates;  // label -> (sum, count)

  for (int s = 0; s < settings; ++s) {
    std::string axes(static_cast<std::size_t>(L), 'Z');
    int code = s;
    for (int i = 0; i < L; ++i) {
      axes[static_cast<std::size_t>(i)] = kAxes[code % 3];
      code /= 3;
    }
    StateVector rotated = psi;
    for (int i = 0; i < L; ++i) {
      if (axes[static_cast<std::size_t>(i)] == 'X') apply_one_site(rotated, i, rot_x);
      if (axes[static_cast<std::size_t>(i)] == 'Y') apply_one_site(rotated, i, rot_y);
    }

    std::vector<double> probs(dim, 0.0);
    if (shots_per_setting == 0) {
      for (std::uint64_t b = 0; b < dim; ++b) probs[b] = std::norm(rotated[b]);
    } else {
      const auto counts =
          draw_counts([&] {
            std::vector<double> p(dim);
            for (std::uint64_t b = 0; b < dim; ++b) p[b] = std::norm(rotated[b]);
            return p;
          }(), L, shots_per_setting,
                      splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (s + 1))));
      for (const auto& [bits, n] : counts)
        probs[string_to_bits(bits)] = static_cast<double>(n) / shots_per_setting;
    }

    // Every Pauli supported on a subset of this setting's axes is estimated
    // from the same shots; estimates are averaged over compatible settings.
    for (std::uint64_t subset = 1; subset < dim; ++subset) {
      double est = 0.0;
      for (std::uint64_t b = 0; b < dim; ++b)
        est += probs[b] * ((std::popcount(b & subset) & 1) ? -1.0 : 1.0);
      std::string label(static_cast<std::size_t>(L), 'I');
      for (int i = 0; i < L; ++i)
        if ((subset >> i) & 1u) label[static_cast<std::size_t>(i)] =
            axes[static_cast<std::size_t>(i)];
      auto& slot = estimates[label];
      slot.first += est;
      slot.second += 1;
    }
  }

  accum.add(PauliString::identity(L), 1.0);
  for (const auto& [label, sum_count] : estimates)
    accum.add(label, sum_count.first / sum_count.second);

  Eigen::MatrixXcd rho = to_dense(accum) / static_cast<double>(dim);

  // Linear inversion can be indefinite at finite shots.  Project onto the
  // nearest PSD unit-trace matrix: Euclidean projection of the spectrum onto
  // the probability simplex (clip the smallest eigenvalues to zero and spread
  // the removed mass uniformly over the rest).  A global clip-then-rescale
  // would instead deflate every population by the clipped mass.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()));
  const Eigen::Index n = es.eigenvalues().size();
  Eigen::VectorXd vals = es.eigenvalues();  // ascending
  double shift = 0.0;
  Eigen::Index keep = n;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index remaining = n - i;
    const double candidate = (1.0 - vals.tail(remaining).sum()) / remaining;
    if (vals(i) + candidate > 0.0) {
      shift = candidate;
      keep = remaining;
      break;
    }
  }
  if (keep == 0) throw std::runtime_error("tomography: degenerate reconstruction");
  Eigen::VectorXd clipped = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = n - keep; i < n; ++i) clipped(i) = vals(i) + shift;
  return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
}

double density_state_fidelity(const Eigen::MatrixXcd& rho, const StateVector& psi) {
  const auto dim = static_cast<Eigen::Index>(psi.dim());
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument("density_state_fidelity: dimension mismatch");
  const Eigen::Map<const Eigen::VectorXcd> v(psi.amplitudes().data(), dim);
  return (v.adjoint() * rho * v)(0, 0).real();
}

namespace {

std::string qasm_gate_line(const Gate& g) {
  std::ostringstream out;
  if (g.kind == GateKind::RZZ) {
    out << "cx q[" << g.a << "],q[" << g.b << "];\n";
    out << "rz(" << fmt_g17(g.angle) << ") q[" << g.b << "];\n";
    out << "cx q[" << g.a << "],q[" << g.b << "];\n";
  } else {
    out << gate_name(g.kind) << "(" << fmt_g17(g.angle) << ") q[" << g.a << "];\n";
  }
  return out.str();
}

}  // namespace

std::string export_circuit(const Circuit& c, CircuitFormat format) {
  if (format == CircuitFormat::json) {
    nlohmann::json j;
    j["L"] = c.L;
    j["t_steps"] = c.t_steps;
    j["digest"] = c.spec_digest;
    j["gates"] = nlohmann::json::array();
    for (const Gate& g : c.gates) {
      nlohmann::json gate;
      switch (g.kind) {
        case GateKind::RZ: gate["kind"] = "RZ"; break;
        case GateKind::RX: gate["kind"] = "RX"; break;
        case GateKind::RY: gate["kind"] = "RY"; break;
        case GateKind::RZZ: gate["kind"] = "RZZ"; break;
      }
      gate["sites"] = g.kind == GateKind::RZZ ? nlohmann::json::array({g.a, g.b})
                                              : nlohmann::json::array({g.a});
      gate["angle"] = g.angle;
      j["gates"].push_back(gate);
    }
    return j.dump(2);
  }

  std::ostringstream out;
  out << "OPENQASM 2.0;\n";
  out << "include \"qelib1.inc\";\n";
  out << "// t_steps=" << c.t_steps << "\n";
  out << "// digest=" << c.spec_digest << "\n";
  out << "qreg q[" << c.L << "];\n";
  for (const Gate& g : c.gates) out << qasm_gate_line(g);
  return out.str();
}

namespace {

struct QasmCursor {
  std::vector<std::string> lines;
  std::size_t pos = 0;

  bool done() const { return pos >= lines.size(); }
  const std::string& peek() const { return lines[pos]; }
  std::string next() { return lines[pos++]; }
};

// Accepts "name(angle) q[i];" and "cx q[a],q[b];" forms produced by the
// exporter.
bool parse_rotation(const std::string& line, std::string& name, double& angle, int& site) {
  const auto open = line.find('(');
  const auto close = line.find(')');
  const auto qopen = line.find("q[", close);
  const auto qclose = line.find(']', qopen);
  if (open == std::string::npos || close == std::string::npos ||
      qopen == std::string::npos || qclose == std::string::npos)
    return false;
  name = line.substr(0, open);
  angle = std::strtod(line.substr(open + 1, close - open - 1).c_str(), nullptr);
  site = std::stoi(line.substr(qopen + 2, qclose - qopen - 2));
  return true;
}

bool parse_cx(const std::string& line, int& a, int& b) {
  if (line.rfind("cx ", 0) != 0) return false;
  const auto first = line.find("q[");
  const auto first_end = line.find(']', first);
  const auto second = line.find("q[", first_end);
  const auto second_end = line.find(']', second);
  if (second == std::string::npos || second_end == std::string::npos) return false;
  a = std::stoi(line.substr(first + 2, first_end - first - 2));
  b = std::stoi(line.substr(second + 2, second_end - second - 2));
  return true;
}

}  // namespace

Circuit parse_qasm2(const std::string& text) {
  QasmCursor cur;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) cur.lines.push_back(line);
  }

  Circuit c;
  if (cur.done() || cur.next().rfind("OPENQASM 2.0", 0) != 0)
    throw std::invalid_argument("parse_qasm2: missing OPENQASM 2.0 header");
  while (!cur.done()) {
    const std::string& l = cur.peek();
    if (l.rfind("include", 0) == 0) {
      cur.next();
    } else if (l.rfind("// t_steps=", 0) == 0) {
      c.t_steps = std::stoi(cur.next().substr(11));
    } else if (l.rfind("// digest=", 0) == 0) {
      c.spec_digest = cur.next().substr(10);
    } else if (l.rfind("qreg q[", 0) == 0) {
      c.L = std::stoi(cur.next().substr(7));
      break;
    } else {
      throw std::invalid_argument("parse_qasm2: unexpected line '" + l + "'");
    }
  }
  if (c.L <= 0) throw std::invalid_argument("parse_qasm2: missing qreg declaration");

  while (!cur.done()) {
    int a = 0, b = 0;
    if (parse_cx(cur.peek(), a, b)) {
      // cx a,b ; rz(theta) b ; cx a,b  folds back into one RZZ.
      cur.next();
      std::string name;
      double angle = 0.0;
      int site = 0;
      if (cur.done() || !parse_rotation(cur.next(), name, angle, site) || name != "rz" ||
          site != b)
        throw std::invalid_argument("parse_qasm2: malformed RZZ expansion");
      int a2 = 0, b2 = 0;
      if (cur.done() || !parse_cx(cur.next(), a2, b2) || a2 != a || b2 != b)
        throw std::invalid_argument("parse_qasm2: malformed RZZ expansion");
      c.gates.push_back({GateKind::RZZ, a, b, angle});
      continue;
    }
    std::string name;
    double angle = 0.0;
    int site = 0;
    if (!parse_rotation(cur.next(), name, angle, site))
      throw std::invalid_argument("parse_qasm2: unsupported statement");
    GateKind kind;
    if (name == "rz") kind = GateKind::RZ;
    else if (name == "rx") kind = GateKind::RX;
    else if (name == "ry") kind = GateKind::RY;
    else throw std::invalid_argument("parse_qasm2: unsupported gate '" + name + "'");
    c.gates.push_back({kind, site, -1, angle});
  }
  for (const Gate& g : c.gates) check_gate(g, c.L);
  return c;
}

Circuit parse_circuit_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Circuit c;
  c.L = j.at("L").get<int>();
  c.t_steps = j.at("t_steps").get<int>();
  c.spec_digest = j.at("digest").get<std::string>();
  for (const auto& gate : j.at("gates")) {
    Gate g;
    const std::string kind = gate.at("kind").get<std::string>();
    if (kind == "RZ") g.kind = GateKind::RZ;
    else if (kind == "RX") g.kind = GateKind::RX;
    else if (kind == "RY") g.kind = GateKind::RY;
    else if (kind == "RZZ") g.kind = GateKind::RZZ;
    else throw std::invalid_argument("circuit json: bad gate kind '" + kind + "'");
    const auto& sites = gate.at("sites");
    g.a = sites.at(0).get<int>();
    g.b = g.kind == GateKind::RZZ ? sites.at(1).get<int>() : -1;
    g.angle = gate.at("angle").get<double>();
    check_gate(g, c.L);
    c.gates.push_back(g);
  }
  return c;
}

}  // namespace cdprep
