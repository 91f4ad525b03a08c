// Command-line front end: simulation, equilibrium reports, Lyapunov spectra,
// and parameter-grid sweeps, with bundled demonstration scenarios.
//
// Exit codes: 0 success, 2 usage/configuration error, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mim/analysis.hpp"
#include "mim/integrate.hpp"
#include "mim/io.hpp"
#include "mim/model.hpp"
#include "mim/sweep.hpp"

namespace fs = std::filesystem;
using mim::Json;

namespace {

struct Scenario {
  std::string name;
  std::string summary;
  mim::SystemParams params;
  mim::State initial;
  double t_end = 200.0;
};

const std::vector<Scenario>& scenarios() {
  static const std::vector<Scenario> table = [] {
    mim::SystemParams base;
    base.g = 0.2;
    base.lambda = 0.1;
    base.n0 = 1000.0;
    const mim::State s0{0.0, 0.0, 0.95, 0.0, 1.0};
    std::vector<Scenario> v;
    Scenario a{"fig3a", "conservative, chaotic inversion jumps", base, s0, 200.0};
    v.push_back(a);
    Scenario b = a;
    b.name = "fig3b";
    b.summary = "membrane damping only; relaxes onto a self-trapped attractor";
    b.params.gamma = 0.01;
    v.push_back(b);
    Scenario c = b;
    c.name = "fig3c";
    c.summary = "photon and phonon losses at zero temperature; decays to vacuum";
    c.params.kappa = 0.02;
    v.push_back(c);
    Scenario d = c;
    d.name = "fig3d";
    d.summary = "thermal photon bath sustains the chaotic oscillations";
    d.params.n_th = 200.0;
    v.push_back(d);
    return v;
  }();
  return table;
}

const Scenario& find_scenario(const std::string& name) {
  for (const Scenario& s : scenarios())
    if (s.name == name) return s;
  throw mim::ConfigError("unknown scenario: " + name +
                         " (available: fig3a, fig3b, fig3c, fig3d)");
}

Json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw mim::ConfigError("cannot open output file: " + path.string());
  return os;
}

Json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw mim::ConfigError("cannot read config file: " + path);
  try {
    return Json::parse(is);
  } catch (const std::exception& e) {
    throw mim::ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

struct CommonOpts {
  std::string output_dir = ".";
  std::string format = "csv";
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& c, bool with_format = true) {
  cmd->add_option("--output-dir", c.output_dir, "Directory for output files");
  if (with_format)
    cmd->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--quiet", c.quiet, "Suppress informational output");
}

// Shared simulate/fixed-points/lyapunov inputs. Precedence:
// defaults < --scenario < --config file < explicit flags.
struct ProblemOpts {
  std::string scenario;
  std::string config_file;
  mim::SystemParams params;
  mim::State initial{0.0, 0.0, 0.95, 0.0, 1.0};
  mim::IntegratorConfig integrator;

  static constexpr int kFlags = 17;
  CLI::Option* opt[kFlags] = {};
  double flag[kFlags] = {};

  enum FlagId {
    kG, kLambda, kN0, kKappa, kGamma, kNth,
    kX0, kP0, kZ0, kPhi0, kQ0,
    kTEnd, kSampleDt, kRtol, kAtol, kHInit, kHMax,
  };

  void add_to(CLI::App* cmd) {
    cmd->add_option("--scenario", scenario, "Preset scenario (see `scenarios`)");
    cmd->add_option("--config", config_file, "JSON config file");
    opt[kG] = cmd->add_option("--g", flag[kG], "Photon tunneling rate");
    opt[kLambda] = cmd->add_option("--lambda", flag[kLambda], "Optomechanical coupling");
    opt[kN0] = cmd->add_option("--n0", flag[kN0], "Initial photon number");
    opt[kKappa] = cmd->add_option("--kappa", flag[kKappa], "Photon decay rate");
    opt[kGamma] = cmd->add_option("--gamma", flag[kGamma], "Phonon decay rate");
    opt[kNth] = cmd->add_option("--n-th", flag[kNth], "Thermal photon number");
    opt[kX0] = cmd->add_option("--x0", flag[kX0], "Initial membrane displacement");
    opt[kP0] = cmd->add_option("--p0", flag[kP0], "Initial membrane momentum");
    opt[kZ0] = cmd->add_option("--z0", flag[kZ0], "Initial photon inversion");
    opt[kPhi0] = cmd->add_option("--phi0", flag[kPhi0], "Initial phase difference");
    opt[kQ0] = cmd->add_option("--q0", flag[kQ0], "Initial photon fraction");
    opt[kTEnd] = cmd->add_option("--t-end", flag[kTEnd], "Integration horizon");
    opt[kSampleDt] = cmd->add_option("--sample-dt", flag[kSampleDt], "Output sampling interval");
    opt[kRtol] = cmd->add_option("--rtol", flag[kRtol], "Relative tolerance");
    opt[kAtol] = cmd->add_option("--atol", flag[kAtol], "Absolute tolerance");
    opt[kHInit] = cmd->add_option("--h-init", flag[kHInit], "Initial step size");
    opt[kHMax] = cmd->add_option("--h-max", flag[kHMax], "Maximum step size");
  }

  [[nodiscard]] bool passed(FlagId id) const { return opt[id] && opt[id]->count() > 0; }

  // defaults < scenario < config file < explicit flags
  void resolve() {
    if (!scenario.empty()) {
      const Scenario& sc = find_scenario(scenario);
      params = sc.params;
      initial = sc.initial;
    }
    if (!config_file.empty()) {
      const Json j = load_json_file(config_file);
      if (j.contains("scenario") && scenario.empty()) {
        const Scenario& sc = find_scenario(j.at("scenario").get<std::string>());
        params = sc.params;
        initial = sc.initial;
      }
      if (j.contains("params")) params = mim::params_from_json(j.at("params"));
      if (j.contains("initial_state")) initial = mim::state_from_json(j.at("initial_state"));
      if (j.contains("integrator"))
        integrator = mim::config_from_json(j.at("integrator"), integrator);
    }
    const auto touch = [&](FlagId id, double& dst) {
      if (passed(id)) dst = flag[id];
    };
    touch(kG, params.g);
    touch(kLambda, params.lambda);
    touch(kN0, params.n0);
    touch(kKappa, params.kappa);
    touch(kGamma, params.gamma);
    touch(kNth, params.n_th);
    touch(kX0, initial.x);
    touch(kP0, initial.p);
    touch(kZ0, initial.z);
    touch(kPhi0, initial.phi);
    touch(kQ0, initial.q);
    touch(kTEnd, integrator.t_end);
    touch(kSampleDt, integrator.sample_dt);
    touch(kRtol, integrator.rtol);
    touch(kAtol, integrator.atol);
    touch(kHInit, integrator.h_init);
    touch(kHMax, integrator.h_max);
    params.validate();
    integrator.validate();
  }
};

Json control_json(const mim::ControlParams& cp) {
  Json j{{"c", finite_or_string(cp.c)},
         {"c_damped", finite_or_string(cp.c_damped)},
         {"d", cp.d},
         {"q0", cp.q0}};
  j["c_tilde"] = cp.c_tilde ? Json(*cp.c_tilde) : Json(nullptr);
  return j;
}

void emit_report(const Json& report, const CommonOpts& common, const std::string& out_name) {
  if (out_name.empty() || out_name == "-") {
    std::cout << report.dump(2) << '\n';
    return;
  }
  fs::create_directories(common.output_dir);
  const fs::path path = fs::path(common.output_dir) / (out_name + ".json");
  open_out(path) << report.dump(2) << '\n';
  if (!common.quiet) std::cerr << "wrote " << path.string() << '\n';
}

int cmd_scenarios(const CommonOpts& common) {
  if (common.format == "json") {
    Json out = Json::array();
    for (const Scenario& s : scenarios())
      out.push_back(Json{{"name", s.name},
                         {"summary", s.summary},
                         {"params", mim::to_json(s.params)},
                         {"initial_state", mim::to_json(s.initial)},
                         {"t_end", s.t_end}});
    std::cout << out.dump(2) << '\n';
    return 0;
  }
  for (const Scenario& s : scenarios()) {
    std::cout << s.name << ": " << s.summary << "\n    g=" << s.params.g
              << " lambda=" << s.params.lambda << " n0=" << s.params.n0
              << " kappa=" << s.params.kappa << " gamma=" << s.params.gamma
              << " n_th=" << s.params.n_th << "  z0=" << s.initial.z
              << " t_end=" << s.t_end << '\n';
  }
  return 0;
}

int cmd_simulate(ProblemOpts& prob, const CommonOpts& common, const std::string& out_name,
                 bool use_oracle) {
  prob.resolve();
  const mim::Trajectory traj =
      use_oracle ? mim::integrate_cartesian_oracle(prob.params, prob.initial, prob.integrator)
                 : mim::integrate(prob.params, prob.initial, prob.integrator);

  fs::create_directories(common.output_dir);
  const fs::path base = fs::path(common.output_dir) / out_name;
  if (common.format == "json") {
    const fs::path path = base.string() + ".json";
    open_out(path) << mim::trajectory_to_json(traj).dump() << '\n';
    if (!common.quiet) std::cerr << "wrote " << path.string() << '\n';
  } else {
    const fs::path csv = base.string() + ".csv";
    auto os = open_out(csv);
    mim::write_trajectory_csv(traj, os);
    const fs::path meta = base.string() + ".meta.json";
    Json m = mim::trajectory_metadata(traj);
    m["initial_state"] = mim::to_json(prob.initial);
    if (!prob.scenario.empty()) m["scenario"] = prob.scenario;
    open_out(meta) << m.dump(2) << '\n';
    if (!common.quiet)
      std::cerr << "wrote " << csv.string() << " (" << traj.size() << " samples) and "
                << meta.string() << '\n';
  }
  return 0;
}

int cmd_fixed_points(ProblemOpts& prob, const CommonOpts& common,
                     const std::string& out_name) {
  prob.resolve();
  const auto fps = mim::fixed_points_closed_form(prob.params);
  Json list = Json::array();
  for (const auto& fp : fps) list.push_back(mim::to_json(fp));
  const Json report{{"schema_version", 1},
                    {"params", mim::to_json(prob.params)},
                    {"control", control_json(mim::control_params(prob.params))},
                    {"count", fps.size()},
                    {"fixed_points", list}};
  emit_report(report, common, out_name);
  return 0;
}

int cmd_lyapunov(ProblemOpts& prob, const CommonOpts& common, const std::string& out_name,
                 const std::string& method, double horizon, double renorm_dt,
                 double transient, double d0) {
  prob.resolve();
  mim::IntegratorConfig tol = mim::lyapunov_tolerances();
  if (prob.passed(ProblemOpts::kRtol)) tol.rtol = prob.integrator.rtol;
  if (prob.passed(ProblemOpts::kAtol)) tol.atol = prob.integrator.atol;

  Json report{{"schema_version", 1},
              {"params", mim::to_json(prob.params)},
              {"initial_state", mim::to_json(prob.initial)},
              {"horizon", horizon},
              {"renorm_dt", renorm_dt},
              {"transient", transient},
              {"divergence", mim::divergence(prob.params)}};

  if (method == "spectrum" || method == "both") {
    report["spectrum"] = mim::to_json(
        mim::lyapunov_spectrum(prob.params, prob.initial, horizon, renorm_dt, transient, tol));
  }
  if (method == "benettin" || method == "both") {
    report["benettin"] = Json{
        {"max_lyapunov",
         mim::max_lyapunov_two_trajectory(prob.params, prob.initial, horizon, d0, renorm_dt, tol)},
        {"d0", d0}};
  }
  emit_report(report, common, out_name);
  return 0;
}

int cmd_sweep(const CommonOpts& common, const std::string& spec_file,
              const std::string& resume_path, const std::string& out_name,
              std::size_t max_cells, int workers_override) {
  mim::PhaseDiagram pd;
  if (!resume_path.empty()) {
    pd = mim::resume_sweep(resume_path, max_cells);
    if (!common.quiet && pd.computed_cells == 0)
      std::cerr << "checkpoint already complete; nothing to compute\n";
  } else {
    if (spec_file.empty())
      throw mim::ConfigError("sweep: provide --spec FILE or --resume CHECKPOINT");
    mim::SweepSpec spec = mim::sweep_spec_from_json(load_json_file(spec_file));
    if (workers_override > 0) spec.workers = static_cast<unsigned>(workers_override);
    pd = mim::run_sweep(spec, max_cells);
  }

  fs::create_directories(common.output_dir);
  const fs::path base = fs::path(common.output_dir) / out_name;
  const fs::path nd = base.string() + ".ndjson";
  {
    auto os = open_out(nd);
    mim::write_phase_diagram_ndjson(pd, os);
  }
  const fs::path summary = base.string() + ".summary.json";
  open_out(summary) << mim::phase_diagram_summary(pd).dump(2) << '\n';
  if (!common.quiet)
    std::cerr << "wrote " << nd.string() << " and " << summary.string() << " ("
              << pd.computed_cells << " cells computed this run"
              << (pd.complete ? "" : "; sweep incomplete, resume to finish") << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean-field dynamics toolkit for a membrane-split optical cavity"};
  app.require_subcommand(1);

  CommonOpts common;

  auto* sc_list = app.add_subcommand("scenarios", "List bundled demonstration scenarios");
  CommonOpts sc_common;
  add_common(sc_list, sc_common);

  auto* sim = app.add_subcommand("simulate", "Integrate the mean-field equations");
  CommonOpts sim_common;
  add_common(sim, sim_common);
  ProblemOpts sim_prob;
  sim_prob.add_to(sim);
  std::string sim_out = "trajectory";
  bool sim_oracle = false;
  sim->add_option("--out", sim_out, "Output basename");
  sim->add_flag("--oracle", sim_oracle,
                "Use the Cartesian-amplitude cross-validation integrator (n_th = 0 only)");

  auto* fp = app.add_subcommand("fixed-points", "Enumerate and classify equilibria");
  CommonOpts fp_common;
  add_common(fp, fp_common, false);
  ProblemOpts fp_prob;
  fp_prob.add_to(fp);
  std::string fp_out;
  fp->add_option("--out", fp_out, "Report basename (default: print to stdout)");

  auto* ly = app.add_subcommand("lyapunov", "Lyapunov spectrum and Benettin estimate");
  CommonOpts ly_common;
  add_common(ly, ly_common, false);
  ProblemOpts ly_prob;
  ly_prob.add_to(ly);
  std::string ly_out, ly_method = "both";
  double ly_horizon = 20000.0, ly_renorm = 1.0, ly_transient = 100.0, ly_d0 = 1e-8;
  ly->add_option("--out", ly_out, "Report basename (default: print to stdout)");
  ly->add_option("--method", ly_method, "spectrum, benettin, or both")
      ->check(CLI::IsMember({"spectrum", "benettin", "both"}));
  ly->add_option("--horizon", ly_horizon, "Averaging horizon");
  ly->add_option("--renorm-dt", ly_renorm, "Reorthonormalization interval");
  ly->add_option("--transient", ly_transient, "Discarded initial span");
  ly->add_option("--d0", ly_d0, "Benettin separation");

  auto* sw = app.add_subcommand("sweep", "Run a parameter-grid sweep");
  CommonOpts sw_common;
  add_common(sw, sw_common, false);
  std::string sw_spec, sw_resume, sw_out = "phase_diagram";
  std::size_t sw_max_cells = std::numeric_limits<std::size_t>::max();
  int sw_workers = 0;
  sw->add_option("--spec", sw_spec, "Sweep spec JSON file");
  sw->add_option("--resume", sw_resume, "Resume from a checkpoint file");
  sw->add_option("--out", sw_out, "Output basename");
  sw->add_option("--max-cells", sw_max_cells, "Compute at most this many new cells");
  sw->add_option("--workers", sw_workers, "Override worker count from the spec");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sc_list->parsed()) return cmd_scenarios(sc_common);
    if (sim->parsed()) return cmd_simulate(sim_prob, sim_common, sim_out, sim_oracle);
    if (fp->parsed()) return cmd_fixed_points(fp_prob, fp_common, fp_out);
    if (ly->parsed())
      return cmd_lyapunov(ly_prob, ly_common, ly_out, ly_method, ly_horizon, ly_renorm,
                          ly_transient, ly_d0);
    if (sw->parsed())
      return cmd_sweep(sw_common, sw_spec, sw_resume, sw_out, sw_max_cells, sw_workers);
  } catch (const mim::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const mim::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const mim::IntegrationError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
