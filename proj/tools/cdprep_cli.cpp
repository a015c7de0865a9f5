// Command-line front end: reproduces the fidelity, oscillation, scaling and
// digitized-measurement datasets as CSV/JSON files.
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cdprep/io.hpp"
#include "cdprep/protocols.hpp"
#include "cdprep/schedules.hpp"
#include "cdprep/trotter.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cdprep;

namespace {

std::uint64_t derive_seed(std::uint64_t base, const std::string& tag) {
  std::uint64_t h = 0xCBF29CE484222325ULL ^ base;
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  h += 0x9E3779B97F4A7C15ULL;
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
  h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
  return h ^ (h >> 31);
}

struct CommonOpts {
  std::string out = "out";
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct SpecOpts {
  int L = 4;
  double h_zi = 1.0;
  double h_xf = 2.0;
  double J_f = 1.0;
  double tau = 1.0;
  std::string boundary = "auto";
  std::string kind = "lcd";
  std::string lambda_f = "auto";
  std::string lu = "fixed-x-pi4";
  int samples = 201;
  double tol = 1e-8;
};

Boundary parse_boundary(const std::string& name) {
  if (name == "periodic") return Boundary::periodic;
  if (name == "antiperiodic") return Boundary::antiperiodic;
  if (name == "auto") return Boundary::automatic;
  throw std::invalid_argument("unknown boundary '" + name + "'");
}

ProtocolSpec make_spec(const SpecOpts& o) {
  ProtocolSpec spec;
  spec.L = o.L;
  spec.h_zi = o.h_zi;
  spec.h_xf = o.h_xf;
  spec.J_f = o.J_f;
  spec.tau = o.tau;
  spec.boundary = parse_boundary(o.boundary);
  spec.kind = protocol_kind_from_string(o.kind);
  spec.sample_count = o.samples;
  spec.evolve_tol = o.tol;
  if (spec.kind == ProtocolKind::lcdlu) {
    if (o.lu == "fixed-x-pi4") spec.lu = fixed_x_pi4();
    else throw std::invalid_argument("unknown --lu '" + o.lu + "' (use fixed-x-pi4)");
  }
  return spec;
}

struct ResolvedLambda {
  double value = 0.0;
  std::string mode;
  double nu = 0.0;
  double analytic_opt = 0.0;
};

ResolvedLambda resolve_lambda_f(const ProtocolSpec& spec, const std::string& request) {
  ResolvedLambda r;
  r.mode = request;
  r.nu = nu_lambda_f(spec.model(), spec.tau);
  r.analytic_opt = r.nu > 0.0 ? 1.0 / (4.0 * r.nu) : 0.0;
  if (spec.kind == ProtocolKind::adiabatic || spec.kind == ProtocolKind::linear) {
    r.value = 0.0;
    r.mode = "none";
    return r;
  }
  if (request == "auto") {
    r.value = lambda_f_opt(spec.model(), spec.tau);
  } else if (request == "brent") {
    r.value = optimize_lambda_f(spec).lambda_f;
  } else {
    std::size_t used = 0;
    r.value = std::stod(request, &used);
    if (used != request.size())
      throw std::invalid_argument("bad --lambda-f '" + request + "'");
    r.mode = "explicit";
  }
  return r;
}

fs::path prepare_out(const CommonOpts& common) {
  fs::path dir(common.out);
  fs::create_directories(dir);
  return dir;
}

json spec_json(const ProtocolSpec& spec) { return json::parse(to_json_string(spec)); }

void write_sidecar(const fs::path& csv_path, const json& config) {
  fs::path meta = csv_path;
  meta.replace_extension(".meta.json");
  json j;
  j["csv"] = csv_path.filename().string();
  j["config"] = config;
  write_text_file(meta.string(), j.dump(2) + "\n");
}

void parallel_indexed(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------

int cmd_run(const CommonOpts& common, const SpecOpts& opts) {
  ProtocolSpec spec = make_spec(opts);
  const ResolvedLambda lf = resolve_lambda_f(spec, opts.lambda_f);
  spec.lambda_f = lf.value;
  spec.validate();

  const fs::path dir = prepare_out(common);
  const RunResult result = run(spec);

  const fs::path traj_path = dir / "run_trajectory.csv";
  write_trajectory_csv(traj_path.string(), result);
  const fs::path sched_path = dir / "run_schedule.csv";
  write_schedule_csv(sched_path.string(), spec.model(), spec.tau, spec.lambda_f,
                     spec.sample_count);
  write_sidecar(sched_path, spec_json(spec));

  json summary;
  summary["spec"] = spec_json(spec);
  summary["lambda_f"] = result.lambda_f;
  summary["lambda_f_mode"] = lf.mode;
  summary["nu"] = lf.nu;
  summary["lambda_f_auto"] = lf.analytic_opt;
  summary["F_final"] = result.f_final;
  summary["F_pre_lu"] = result.f_pre_lu;
  summary["E"] = result.final_energy;
  summary["E_ground"] = result.ground_energy;
  summary["E_ratio"] = result.energy_ratio;
  summary["max_norm_drift"] = result.max_norm_drift;
  summary["trajectory_csv_path"] = traj_path.string();
  write_text_file((dir / "run_summary.json").string(), summary.dump(2) + "\n");
  write_sidecar(traj_path, summary);
  std::cout << "F_final=" << fmt_g17(result.f_final) << " E=" << fmt_g17(result.final_energy)
            << " E_ratio=" << fmt_g17(result.energy_ratio) << "\n";
  return 0;
}

int cmd_scan_lambda(const CommonOpts& common, const SpecOpts& opts, double lf_min,
                    double lf_max, double lf_step) {
  if (!(lf_step > 0.0) || lf_max < lf_min)
    throw std::invalid_argument("scan-lambda: empty grid");
  std::vector<double> grid;
  for (double x = lf_min; x <= lf_max + 1e-12; x += lf_step) grid.push_back(x);
  if (grid.empty()) throw std::invalid_argument("scan-lambda: empty grid");

  ProtocolSpec base = make_spec(opts);
  if (base.kind != ProtocolKind::lcd && base.kind != ProtocolKind::lcdlu)
    base.kind = ProtocolKind::lcd;
  base.sample_count = 2;
  base.track_instantaneous = false;
  base.validate();
  const double nu = nu_lambda_f(base.model(), base.tau);

  std::vector<double> fidelities(grid.size());
  parallel_indexed(static_cast<int>(grid.size()), common.jobs, [&](int i) {
    ProtocolSpec spec = base;
    spec.lambda_f = grid[static_cast<std::size_t>(i)];
    fidelities[static_cast<std::size_t>(i)] = run(spec).f_final;
  });

  const fs::path dir = prepare_out(common);
  const fs::path csv_path = dir / "scan_lambda.csv";
  CsvWriter csv(csv_path.string(), {"lambda_f", "F_final"});
  for (std::size_t i = 0; i < grid.size(); ++i) csv.row({grid[i], fidelities[i]});

  json summary;
  summary["spec"] = spec_json(base);
  summary["nu"] = nu;
  summary["lambda_f_auto"] = nu > 0 ? 1.0 / (4.0 * nu) : 0.0;
  summary["grid"] = {{"min", lf_min}, {"max", lf_max}, {"step", lf_step}};
  write_text_file((dir / "scan_lambda_summary.json").string(), summary.dump(2) + "\n");
  write_sidecar(csv_path, summary);
  std::cout << "points=" << grid.size() << " nu=" << fmt_g17(nu) << "\n";
  return 0;
}

int cmd_scan_hx(const CommonOpts& common, const SpecOpts& opts, double hx_min, double hx_max,
                int hx_points, bool with_opt_lu) {
  if (hx_points < 1 || !(hx_min > 0.0) || hx_max < hx_min)
    throw std::invalid_argument("scan-hx: empty grid");
  std::vector<double> grid(static_cast<std::size_t>(hx_points));
  for (int i = 0; i < hx_points; ++i)
    grid[static_cast<std::size_t>(i)] =
        hx_points == 1 ? hx_min
                       : std::exp(std::log(hx_min) + (std::log(hx_max) - std::log(hx_min)) *
                                                         i / (hx_points - 1));

  struct Row {
    double hxf, lambda_f, f_ad, f_lcd, f_fixed, f_opt;
  };
  std::vector<Row> rows(grid.size());
  parallel_indexed(static_cast<int>(grid.size()), common.jobs, [&](int i) {
    SpecOpts point = opts;
    point.h_xf = grid[static_cast<std::size_t>(i)];
    point.kind = "lcd";
    ProtocolSpec spec = make_spec(point);
    spec.sample_count = 2;
    spec.track_instantaneous = false;
    const ResolvedLambda lf = resolve_lambda_f(spec, opts.lambda_f);
    spec.lambda_f = lf.value;

    Row& row = rows[static_cast<std::size_t>(i)];
    row.hxf = point.h_xf;
    row.lambda_f = lf.value;
    ProtocolSpec ad = spec;
    ad.kind = ProtocolKind::adiabatic;
    ad.lambda_f = 0.0;
    row.f_ad = run(ad).f_final;
    const RunResult lcd = run(spec);
    row.f_lcd = lcd.f_final;
    row.f_fixed = run([&] {
                    ProtocolSpec s = spec;
                    s.kind = ProtocolKind::lcdlu;
                    s.lu = fixed_x_pi4();
                    return s;
                  }()).f_final;
    row.f_opt = with_opt_lu ? optimize_lu(spec, LuMode::general).fidelity : 0.0;
  });

  const fs::path dir = prepare_out(common);
  const fs::path csv_path = dir / "scan_hx.csv";
  std::vector<std::string> header{"h_xf", "lambda_f", "F_adiabatic", "F_lcd", "F_lcdlu_fixed"};
  if (with_opt_lu) header.push_back("F_lcdlu_opt");
  CsvWriter csv(csv_path.string(), header);
  for (const Row& r : rows) {
    std::vector<double> cells{r.hxf, r.lambda_f, r.f_ad, r.f_lcd, r.f_fixed};
    if (with_opt_lu) cells.push_back(r.f_opt);
    csv.row(cells);
  }
  json summary;
  summary["spec"] = spec_json(make_spec(opts));
  summary["lambda_f_mode"] = opts.lambda_f;
  summary["grid"] = {{"min", hx_min}, {"max", hx_max}, {"points", hx_points}};
  write_sidecar(csv_path, summary);
  std::cout << "points=" << grid.size() << "\n";
  return 0;
}

int cmd_scaling(const CommonOpts& common, const SpecOpts& opts, std::vector<int> sizes,
                int opt_max_l, bool with_opt_lu) {
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  if (sizes.size() < 2)
    throw std::invalid_argument("scaling: need at least two distinct system sizes");

  SpecOpts base_opts = opts;
  base_opts.kind = "lcd";
  ProtocolSpec base = make_spec(base_opts);
  base.lu = fixed_x_pi4();
  const ScalingResult result = scaling_experiment(base, sizes, opt_max_l, with_opt_lu);

  const fs::path dir = prepare_out(common);
  const fs::path csv_path = dir / "scaling.csv";
  CsvWriter csv(csv_path.string(), {"L", "kind", "F_final"});
  for (const auto& [kind, values] : result.fidelity)
    for (std::size_t i = 0; i < result.sizes.size(); ++i)
      csv.row({std::to_string(result.sizes[i]), kind, fmt_g17(values[i])});

  json summary;
  summary["spec"] = spec_json(base);
  summary["sizes"] = result.sizes;
  summary["lambda_f"] = result.lambda_f;
  summary["fits"] = json::object();
  for (const auto& [kind, fit] : result.fit) {
    summary["fits"][kind] = {{"c", fit.c}, {"a", fit.a}};
    summary["fits"][kind]["residuals"] = fit.residuals;
  }
  for (const auto& [kind, values] : result.fidelity) summary["fidelity"][kind] = values;
  write_text_file((dir / "scaling_summary.json").string(), summary.dump(2) + "\n");
  write_sidecar(csv_path, summary);
  for (const auto& [kind, fit] : result.fit)
    std::cout << kind << ": c=" << fmt_g17(fit.c) << " a=" << fmt_g17(fit.a) << "\n";
  return 0;
}

int cmd_trotter(const CommonOpts& common, const SpecOpts& opts, std::vector<int> sizes,
                int t_steps, int shots, bool tomo, int tomo_shots, bool qasm) {
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  if (sizes.empty()) throw std::invalid_argument("trotter: empty size list");
  if (t_steps < 1) throw std::invalid_argument("trotter: t_steps must be >= 1");
  if (shots < 1) throw std::invalid_argument("trotter: shots must be >= 1");

  const fs::path dir = prepare_out(common);
  struct Row {
    int L;
    std::string kind;
    double lambda_f, e_est, e_err, e_exact, e_grd, ratio_est, ratio_exact, f_digitized;
  };
  std::vector<Row> rows;

  for (int L : sizes) {
    SpecOpts point = opts;
    point.L = L;
    point.kind = "lcd";
    ProtocolSpec lcd = make_spec(point);
    lcd.sample_count = 2;
    lcd.track_instantaneous = false;
    const ResolvedLambda lf = resolve_lambda_f(lcd, opts.lambda_f);
    lcd.lambda_f = lf.value;
    ProtocolSpec lcdlu = lcd;
    lcdlu.kind = ProtocolKind::lcdlu;
    lcdlu.lu = fixed_x_pi4();

    const PauliSum h0 = base_hamiltonian(lcd, lcd.tau);
    const double e_grd = ground_state(h0).energy;
    const StateVector init = StateVector::basis_state(L, (std::uint64_t{1} << L) - 1);

    for (const ProtocolSpec* spec : {&lcd, &lcdlu}) {
      const std::string kind = to_string(spec->kind);
      const Circuit circuit = synthesize(*spec, t_steps);
      const StateVector psi = simulate_circuit(circuit, init);
      const std::string tag = "L" + std::to_string(L) + "_" + kind;

      const ShotRecord rec_z =
          sample(psi, MeasBasis::Z, shots, derive_seed(common.seed, tag + "_Z"));
      const ShotRecord rec_x =
          sample(psi, MeasBasis::X, shots, derive_seed(common.seed, tag + "_X"));
      const EnergyEstimate est =
          estimate_energy(rec_z, rec_x, spec->h_xf, spec->J_f, spec->boundary);
      const double e_exact = expectation(h0, psi);

      write_text_file((dir / ("hist_" + tag + "_Z.json")).string(),
                      to_json_string(rec_z) + "\n");
      write_text_file((dir / ("hist_" + tag + "_X.json")).string(),
                      to_json_string(rec_x) + "\n");
      if (qasm)
        write_text_file((dir / ("circuit_" + tag + ".qasm")).string(),
                        export_circuit(circuit, CircuitFormat::qasm2));

      double f_digitized = 0.0;
      if (L <= 10) {
        ProtocolSpec cont = *spec;
        f_digitized = fidelity(run(cont).final_state, psi);
      }
      rows.push_back({L, kind, lf.value, est.energy, est.std_error, e_exact, e_grd,
                      est.energy / e_grd, e_exact / e_grd, f_digitized});
    }

    if (tomo && L <= 4) {
      const Circuit prep = synthesize(lcd, t_steps);
      const StateVector psi = simulate_circuit(prep, init);
      const Eigen::MatrixXcd rho =
          tomography(prep, tomo_shots, derive_seed(common.seed, "tomo_L" + std::to_string(L)),
                     &init);
      json tj;
      tj["L"] = L;
      tj["shots_per_setting"] = tomo_shots;
      tj["fidelity_to_simulated"] = density_state_fidelity(rho, psi);
      tj["fidelity_to_target"] =
          density_state_fidelity(rho, ground_state(h0).state);
      write_text_file((dir / ("tomography_L" + std::to_string(L) + ".json")).string(),
                      tj.dump(2) + "\n");
    }
  }

  const fs::path csv_path = dir / "trotter.csv";
  CsvWriter csv(csv_path.string(),
                {"L", "kind", "lambda_f", "E_est", "E_stderr", "E_exact", "E_ground",
                 "ratio_est", "ratio_exact", "F_digitized"});
  for (const Row& r : rows)
    csv.row({std::to_string(r.L), r.kind, fmt_g17(r.lambda_f), fmt_g17(r.e_est),
             fmt_g17(r.e_err), fmt_g17(r.e_exact), fmt_g17(r.e_grd), fmt_g17(r.ratio_est),
             fmt_g17(r.ratio_exact), fmt_g17(r.f_digitized)});

  json summary;
  summary["spec"] = spec_json(make_spec(opts));
  summary["t_steps"] = t_steps;
  summary["shots"] = shots;
  summary["seed"] = common.seed;
  summary["sizes"] = sizes;
  write_sidecar(csv_path, summary);
  std::cout << "rows=" << rows.size() << "\n";
  return 0;
}

int cmd_export_circuit(const CommonOpts& common, const SpecOpts& opts, int t_steps,
                       const std::string& format) {
  ProtocolSpec spec = make_spec(opts);
  const ResolvedLambda lf = resolve_lambda_f(spec, opts.lambda_f);
  spec.lambda_f = lf.value;
  const Circuit circuit = synthesize(spec, t_steps);

  const fs::path dir = prepare_out(common);
  CircuitFormat fmt;
  std::string ext;
  if (format == "qasm2") {
    fmt = CircuitFormat::qasm2;
    ext = ".qasm";
  } else if (format == "json") {
    fmt = CircuitFormat::json;
    ext = ".json";
  } else {
    throw std::invalid_argument("export-circuit: unknown format '" + format + "'");
  }
  const fs::path path =
      dir / ("circuit_" + opts.kind + "_L" + std::to_string(opts.L) + "_T" +
             std::to_string(t_steps) + ext);
  write_text_file(path.string(), export_circuit(circuit, fmt));
  std::cout << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterdiabatic ground-state preparation on the transverse-field "
               "Ising chain: simulation, optimization and digitized sampling"};
  app.set_config("--config", "", "TOML config file (flags override config values)");

  CommonOpts common;
  app.add_option("--out", common.out, "output directory")->capture_default_str();
  app.add_option("--seed", common.seed, "base PRNG seed")->capture_default_str();
  app.add_option("--jobs", common.jobs, "worker threads for sweeps")->capture_default_str();

  SpecOpts opts;
  auto add_spec_options = [&opts](CLI::App* cmd, bool with_kind) {
    cmd->add_option("--L", opts.L, "system size");
    cmd->add_option("--hzi", opts.h_zi, "initial longitudinal field");
    cmd->add_option("--hxf", opts.h_xf, "final transverse field");
    cmd->add_option("--jf", opts.J_f, "final coupling");
    cmd->add_option("--tau", opts.tau, "total evolution time");
    cmd->add_option("--boundary", opts.boundary, "periodic|antiperiodic|auto");
    if (with_kind)
      cmd->add_option("--kind", opts.kind, "adiabatic|linear|lcd|lcdlu");
    cmd->add_option("--lambda-f", opts.lambda_f, "number | auto | brent");
    cmd->add_option("--lu", opts.lu, "local unitary for lcdlu (fixed-x-pi4)");
    cmd->add_option("--samples", opts.samples, "trajectory sample count");
    cmd->add_option("--tol", opts.tol, "integrator tolerance");
  };

  auto* c_run = app.add_subcommand("run", "run one protocol, write trajectory + summary");
  add_spec_options(c_run, true);

  double lf_min = 0.0, lf_max = 6.0, lf_step = 0.05;
  auto* c_scan = app.add_subcommand("scan-lambda", "final fidelity on a lambda_f grid");
  add_spec_options(c_scan, true);
  c_scan->add_option("--lf-min", lf_min)->capture_default_str();
  c_scan->add_option("--lf-max", lf_max)->capture_default_str();
  c_scan->add_option("--lf-step", lf_step)->capture_default_str();

  double hx_min = 0.2, hx_max = 10.0;
  int hx_points = 24;
  bool hx_opt_lu = false;
  auto* c_hx = app.add_subcommand("scan-hx", "protocol comparison over a log h_xf grid");
  add_spec_options(c_hx, false);
  c_hx->add_option("--hx-min", hx_min)->capture_default_str();
  c_hx->add_option("--hx-max", hx_max)->capture_default_str();
  c_hx->add_option("--hx-points", hx_points)->capture_default_str();
  c_hx->add_flag("--with-opt-lu", hx_opt_lu, "include the simplex-optimal LU column");

  std::vector<int> l_list;
  int opt_max_l = 11;
  bool scaling_opt_lu = false;
  auto* c_scaling = app.add_subcommand("scaling", "size scan with exponential fits");
  add_spec_options(c_scaling, false);
  c_scaling->add_option("--L-list", l_list, "system sizes")->expected(-1);
  c_scaling->add_option("--opt-max-L", opt_max_l,
                        "re-optimize lambda_f up to this size, reuse beyond")
      ->capture_default_str();
  c_scaling->add_flag("--with-opt-lu", scaling_opt_lu, "include the optimized-LU series");

  std::vector<int> trotter_l;
  int t_steps = 20, shots = 1000, tomo_shots = 400;
  bool with_tomo = false, with_qasm = false;
  auto* c_trotter =
      app.add_subcommand("trotter", "digitized circuits, shot sampling, energy estimates");
  add_spec_options(c_trotter, false);
  c_trotter->add_option("--L-list", trotter_l, "system sizes")->expected(-1);
  c_trotter->add_option("--tsteps", t_steps)->capture_default_str();
  c_trotter->add_option("--shots", shots)->capture_default_str();
  c_trotter->add_flag("--tomography", with_tomo, "state tomography at L <= 4");
  c_trotter->add_option("--tomo-shots", tomo_shots)->capture_default_str();
  c_trotter->add_flag("--qasm", with_qasm, "export circuits as OpenQASM 2.0");

  int export_steps = 20;
  std::string export_format = "qasm2";
  auto* c_export = app.add_subcommand("export-circuit", "write one synthesized circuit");
  add_spec_options(c_export, true);
  c_export->add_option("--tsteps", export_steps)->capture_default_str();
  c_export->add_option("--format", export_format, "qasm2|json")->capture_default_str();

  app.require_subcommand(1);
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_run->parsed()) return cmd_run(common, opts);
    if (c_scan->parsed()) return cmd_scan_lambda(common, opts, lf_min, lf_max, lf_step);
    if (c_hx->parsed()) return cmd_scan_hx(common, opts, hx_min, hx_max, hx_points, hx_opt_lu);
    if (c_scaling->parsed())
      return cmd_scaling(common, opts, l_list, opt_max_l, scaling_opt_lu);
    if (c_trotter->parsed())
      return cmd_trotter(common, opts, trotter_l, t_steps, shots, with_tomo, tomo_shots,
                         with_qasm);
    if (c_export->parsed()) return cmd_export_circuit(common, opts, export_steps, export_format);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
