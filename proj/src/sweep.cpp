#include "mim/sweep.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace mim {

const char* to_string(SweepTask t) {
  switch (t) {
    case SweepTask::classify_regime: return "classify_regime";
    case SweepTask::max_lyapunov: return "max_lyapunov";
    case SweepTask::final_state: return "final_state";
    case SweepTask::fixed_point_count: return "fixed_point_count";
  }
  return "?";
}

SweepTask sweep_task_from_string(const std::string& s) {
  if (s == "classify_regime") return SweepTask::classify_regime;
  if (s == "max_lyapunov") return SweepTask::max_lyapunov;
  if (s == "final_state") return SweepTask::final_state;
  if (s == "fixed_point_count") return SweepTask::fixed_point_count;
  throw ConfigError("unknown sweep task: " + s);
}

void SweepSpec::validate() const {
  base.validate();
  integrator.validate();
  if (axes.empty() || axes.size() > 2)
    throw ConfigError("sweep spec: need 1 or 2 axes");
  for (const SweepAxis& ax : axes) {
    get_param(base, ax.param);  // name check
    if (ax.values.empty()) throw ConfigError("sweep axis '" + ax.param + "' is empty");
    for (std::size_t i = 0; i + 1 < ax.values.size(); ++i) {
      const double d0 = ax.values[1] - ax.values[0];
      const double di = ax.values[i + 1] - ax.values[i];
      if (ax.values.size() > 1 && (di == 0.0 || (di > 0.0) != (d0 > 0.0)))
        throw ConfigError("sweep axis '" + ax.param + "' must be strictly monotone");
    }
  }
  if (workers < 1) throw ConfigError("sweep spec: workers must be >= 1");
  if (!(lyapunov.horizon > lyapunov.renorm_dt && lyapunov.renorm_dt > 0.0))
    throw ConfigError("sweep spec: lyapunov horizon/renorm_dt invalid");
  if (!(lyapunov.d0 >= 1e-10 && lyapunov.d0 <= 1e-6))
    throw ConfigError("sweep spec: lyapunov d0 out of [1e-10, 1e-6]");
  if (initial_state) {
    if (!initial_state->finite() || initial_state->q < 0.0 ||
        std::fabs(initial_state->z) > initial_state->q)
      throw ConfigError("sweep spec: initial state inadmissible");
  }
}

std::size_t SweepSpec::cell_count() const {
  std::size_t n = 1;
  for (const SweepAxis& ax : axes) n *= ax.values.size();
  return n;
}

State SweepSpec::initial() const {
  return initial_state.value_or(State{0.0, 0.0, 0.95, 0.0, 1.0});
}

Json sweep_spec_to_json(const SweepSpec& spec) {
  Json axes = Json::array();
  for (const SweepAxis& ax : spec.axes)
    axes.push_back(Json{{"param", ax.param}, {"values", ax.values}});
  Json j{{"schema_version", 1},
         {"base", to_json(spec.base)},
         {"axes", axes},
         {"task", to_string(spec.task)},
         {"integrator", to_json(spec.integrator)},
         {"lyapunov",
          Json{{"horizon", spec.lyapunov.horizon},
               {"renorm_dt", spec.lyapunov.renorm_dt},
               {"d0", spec.lyapunov.d0}}},
         {"thresholds",
          Json{{"lyap_chaos", spec.thresholds.lyap_chaos},
               {"trapped_abs_z", spec.thresholds.trapped_abs_z},
               {"rabi_swing", spec.thresholds.rabi_swing},
               {"rabi_detuning", spec.thresholds.rabi_detuning},
               {"decayed_fraction", spec.thresholds.decayed_fraction},
               {"lyap_horizon", spec.thresholds.lyap_horizon}}}};
  if (spec.initial_state)
    j["initial_state"] = to_json(*spec.initial_state);
  else
    j["initial_state"] = "default";
  j["workers"] = spec.workers;
  j["checkpoint_path"] = spec.checkpoint_path;
  return j;
}

SweepSpec sweep_spec_from_json(const Json& j) {
  SweepSpec spec;
  if (!j.contains("base")) throw ConfigError("sweep spec: missing field 'base'");
  spec.base = params_from_json(j.at("base"));
  if (!j.contains("axes") || !j.at("axes").is_array())
    throw ConfigError("sweep spec: missing field 'axes'");
  for (const Json& aj : j.at("axes")) {
    SweepAxis ax;
    if (!aj.contains("param") || !aj.at("param").is_string())
      throw ConfigError("sweep spec: axis missing field 'param'");
    ax.param = aj.at("param").get<std::string>();
    if (!aj.contains("values") || !aj.at("values").is_array())
      throw ConfigError("sweep spec: axis missing field 'values'");
    for (const Json& v : aj.at("values")) {
      if (!v.is_number()) throw ConfigError("sweep spec: axis values must be numbers");
      ax.values.push_back(v.get<double>());
    }
    spec.axes.push_back(std::move(ax));
  }
  if (j.contains("task")) spec.task = sweep_task_from_string(j.at("task").get<std::string>());
  if (j.contains("integrator")) spec.integrator = config_from_json(j.at("integrator"));
  if (j.contains("lyapunov")) {
    const Json& lj = j.at("lyapunov");
    if (lj.contains("horizon")) spec.lyapunov.horizon = lj.at("horizon").get<double>();
    if (lj.contains("renorm_dt")) spec.lyapunov.renorm_dt = lj.at("renorm_dt").get<double>();
    if (lj.contains("d0")) spec.lyapunov.d0 = lj.at("d0").get<double>();
  }
  if (j.contains("thresholds")) {
    const Json& tj = j.at("thresholds");
    if (tj.contains("lyap_chaos")) spec.thresholds.lyap_chaos = tj.at("lyap_chaos").get<double>();
    if (tj.contains("trapped_abs_z"))
      spec.thresholds.trapped_abs_z = tj.at("trapped_abs_z").get<double>();
    if (tj.contains("rabi_swing")) spec.thresholds.rabi_swing = tj.at("rabi_swing").get<double>();
    if (tj.contains("rabi_detuning"))
      spec.thresholds.rabi_detuning = tj.at("rabi_detuning").get<double>();
    if (tj.contains("decayed_fraction"))
      spec.thresholds.decayed_fraction = tj.at("decayed_fraction").get<double>();
    if (tj.contains("lyap_horizon"))
      spec.thresholds.lyap_horizon = tj.at("lyap_horizon").get<double>();
  }
  if (j.contains("initial_state")) {
    const Json& ij = j.at("initial_state");
    if (ij.is_string()) {
      if (ij.get<std::string>() != "default")
        throw ConfigError("sweep spec: initial_state must be a state object or \"default\"");
    } else {
      spec.initial_state = state_from_json(ij);
    }
  }
  if (j.contains("workers")) spec.workers = j.at("workers").get<unsigned>();
  if (j.contains("checkpoint_path"))
    spec.checkpoint_path = j.at("checkpoint_path").get<std::string>();
  spec.validate();
  return spec;
}

namespace {

// FNV-1a over the canonical dump, minus execution details.
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::string sweep_spec_hash(const SweepSpec& spec) {
  Json j = sweep_spec_to_json(spec);
  j.erase("workers");
  j.erase("checkpoint_path");
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

namespace {

std::array<int, 2> cell_index(const SweepSpec& spec, std::size_t flat) {
  if (spec.axes.size() == 1) return {static_cast<int>(flat), 0};
  const std::size_t n1 = spec.axes[1].values.size();
  return {static_cast<int>(flat / n1), static_cast<int>(flat % n1)};
}

Json cell_values(const SweepSpec& spec, const std::array<int, 2>& idx) {
  Json v;
  v[spec.axes[0].param] = spec.axes[0].values[static_cast<std::size_t>(idx[0])];
  if (spec.axes.size() == 2)
    v[spec.axes[1].param] = spec.axes[1].values[static_cast<std::size_t>(idx[1])];
  return v;
}

SystemParams cell_params(const SweepSpec& spec, const std::array<int, 2>& idx) {
  SystemParams p = spec.base;
  set_param(p, spec.axes[0].param, spec.axes[0].values[static_cast<std::size_t>(idx[0])]);
  if (spec.axes.size() == 2)
    set_param(p, spec.axes[1].param, spec.axes[1].values[static_cast<std::size_t>(idx[1])]);
  return p;
}

Json evidence_json(const RegimeEvidence& ev) {
  return Json{{"lyapunov_max", ev.lyapunov_max},
              {"z_mean_abs_late", ev.z_mean_abs_late},
              {"z_sign_changes", ev.z_sign_changes},
              {"q_final", ev.q_final},
              {"z_swing", ev.z_swing},
              {"x_max_abs", ev.x_max_abs},
              {"short_window", ev.short_window}};
}

Json compute_cell(const SweepSpec& spec, const std::array<int, 2>& idx) {
  const SystemParams params = cell_params(spec, idx);
  params.validate();
  switch (spec.task) {
    case SweepTask::classify_regime: {
      const Trajectory traj = integrate(params, spec.initial(), spec.integrator);
      const RegimeLabel lab = classify_regime(traj, params, spec.thresholds);
      return Json{{"label", to_string(lab.label)}, {"evidence", evidence_json(lab.evidence)}};
    }
    case SweepTask::max_lyapunov: {
      const double v = max_lyapunov_two_trajectory(params, spec.initial(),
                                                   spec.lyapunov.horizon, spec.lyapunov.d0,
                                                   spec.lyapunov.renorm_dt);
      return Json{{"max_lyapunov", v}};
    }
    case SweepTask::final_state: {
      const Trajectory traj = integrate(params, spec.initial(), spec.integrator);
      return Json{{"final_state", to_json(traj.states.back())},
                  {"energy", energy(traj.states.back(), params)}};
    }
    case SweepTask::fixed_point_count: {
      const auto fps = fixed_points_closed_form(params);
      Json fams = Json::array();
      for (const FixedPoint& fp : fps) fams.push_back(to_string(fp.family));
      return Json{{"count", fps.size()}, {"families", fams}};
    }
  }
  throw ConfigError("unknown sweep task");
}

Json cell_to_checkpoint_line(const SweepCell& c) {
  return Json{{"cell", Json::array({c.index[0], c.index[1]})},
              {"values", c.values},
              {"result", c.result},
              {"error", c.error},
              {"wall_ms", c.wall_ms}};
}

void write_checkpoint(const SweepSpec& spec, const std::vector<SweepCell>& cells,
                      const std::string& path) {
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw ConfigError("cannot write checkpoint: " + path);
    Json header{{"schema_version", 1},
                {"kind", "sweep_checkpoint"},
                {"spec_hash", sweep_spec_hash(spec)},
                {"spec", sweep_spec_to_json(spec)}};
    os << header.dump() << '\n';
    for (const SweepCell& c : cells)
      if (c.done) os << cell_to_checkpoint_line(c).dump() << '\n';
  }
  std::filesystem::rename(tmp, target);  // atomic replace
}

struct CheckpointData {
  SweepSpec spec;
  std::vector<SweepCell> cells;  // only completed ones, sparse by index
};

CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read checkpoint: " + path);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("checkpoint is empty: " + path);
  Json header = Json::parse(line, nullptr, true);
  if (!header.contains("kind") || header.at("kind") != "sweep_checkpoint")
    throw ConfigError("not a sweep checkpoint: " + path);
  CheckpointData data;
  data.spec = sweep_spec_from_json(header.at("spec"));
  const std::string recorded = header.at("spec_hash").get<std::string>();
  if (recorded != sweep_spec_hash(data.spec))
    throw ConfigError("checkpoint spec hash mismatch in " + path);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Json cj = Json::parse(line);
    SweepCell c;
    c.index = {cj.at("cell").at(0).get<int>(), cj.at("cell").at(1).get<int>()};
    c.values = cj.at("values");
    c.result = cj.at("result");
    c.error = cj.at("error").get<std::string>();
    c.wall_ms = cj.at("wall_ms").get<double>();
    c.done = true;
    data.cells.push_back(std::move(c));
  }
  return data;
}

PhaseDiagram execute(const SweepSpec& spec, std::vector<SweepCell> preloaded,
                     std::size_t max_cells) {
  const std::size_t total = spec.cell_count();
  PhaseDiagram pd;
  pd.spec = spec;
  pd.cells.resize(total);
  for (std::size_t f = 0; f < total; ++f) {
    pd.cells[f].index = cell_index(spec, f);
    pd.cells[f].values = cell_values(spec, pd.cells[f].index);
    pd.cells[f].result = nullptr;
  }
  const std::size_t n1 = spec.axes.size() == 2 ? spec.axes[1].values.size() : 1;
  for (SweepCell& c : preloaded) {
    const std::size_t f =
        static_cast<std::size_t>(c.index[0]) * n1 + static_cast<std::size_t>(c.index[1]);
    if (f < total) pd.cells[f] = std::move(c);
  }

  std::vector<std::size_t> pending;
  for (std::size_t f = 0; f < total; ++f)
    if (!pd.cells[f].done) pending.push_back(f);
  const std::size_t budget = std::min(max_cells, pending.size());

  std::atomic<std::size_t> cursor{0};
  std::mutex sink_mutex;
  std::size_t completed_since_flush = 0;
  auto last_flush = std::chrono::steady_clock::now();
  const bool checkpointing = !spec.checkpoint_path.empty();
  std::string sink_error;

  const auto worker = [&]() {
    while (true) {
      const std::size_t slot = cursor.fetch_add(1);
      if (slot >= budget) return;
      const std::size_t f = pending[slot];
      SweepCell& cell = pd.cells[f];
      const auto t0 = std::chrono::steady_clock::now();
      Json result = nullptr;
      std::string error;
      try {
        result = compute_cell(spec, cell.index);
      } catch (const std::exception& e) {
        error = e.what();
      }
      const auto t1 = std::chrono::steady_clock::now();
      std::lock_guard<std::mutex> lock(sink_mutex);
      cell.result = std::move(result);
      cell.error = std::move(error);
      cell.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      cell.done = true;
      ++pd.computed_cells;
      if (checkpointing && sink_error.empty()) {
        ++completed_since_flush;
        const auto now = std::chrono::steady_clock::now();
        if (completed_since_flush >= 64 ||
            std::chrono::duration<double>(now - last_flush).count() >= 30.0) {
          try {
            write_checkpoint(spec, pd.cells, spec.checkpoint_path);
          } catch (const std::exception& e) {
            sink_error = e.what();  // surfaced after the pool joins
          }
          completed_since_flush = 0;
          last_flush = now;
        }
      }
    }
  };

  if (budget > 0) {
    const unsigned n_workers =
        std::min<std::size_t>(std::max(1u, spec.workers), budget);
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (!sink_error.empty()) throw ConfigError("checkpoint write failed: " + sink_error);

  if (checkpointing) write_checkpoint(spec, pd.cells, spec.checkpoint_path);
  pd.complete = true;
  for (const SweepCell& c : pd.cells)
    if (!c.done) pd.complete = false;
  return pd;
}

}  // namespace

PhaseDiagram run_sweep(const SweepSpec& spec, std::size_t max_cells) {
  spec.validate();
  if (!spec.checkpoint_path.empty() && std::filesystem::exists(spec.checkpoint_path)) {
    CheckpointData data = read_checkpoint(spec.checkpoint_path);
    if (sweep_spec_hash(data.spec) != sweep_spec_hash(spec))
      throw ConfigError("existing checkpoint was built from a different spec: " +
                        spec.checkpoint_path);
    return execute(spec, std::move(data.cells), max_cells);
  }
  return execute(spec, {}, max_cells);
}

PhaseDiagram resume_sweep(const std::string& checkpoint_path, std::size_t max_cells) {
  CheckpointData data = read_checkpoint(checkpoint_path);
  SweepSpec spec = data.spec;
  spec.checkpoint_path = checkpoint_path;
  return execute(spec, std::move(data.cells), max_cells);
}

void write_phase_diagram_ndjson(const PhaseDiagram& pd, std::ostream& os) {
  Json header{{"schema_version", 1},
              {"kind", "phase_diagram"},
              {"spec_hash", sweep_spec_hash(pd.spec)},
              {"task", to_string(pd.spec.task)},
              {"cells", pd.cells.size()}};
  os << header.dump() << '\n';
  for (const SweepCell& c : pd.cells) {
    Json line{{"cell", Json::array({c.index[0], c.index[1]})},
              {"values", c.values},
              {"result", c.result},
              {"error", c.done ? Json(c.error) : Json("not computed")}};
    os << line.dump() << '\n';
  }
}

Json phase_diagram_summary(const PhaseDiagram& pd) {
  std::size_t done = 0, failed = 0;
  Json labels = Json::object();
  double wall_ms = 0.0;
  for (const SweepCell& c : pd.cells) {
    if (c.done) ++done;
    if (!c.error.empty()) ++failed;
    wall_ms += c.wall_ms;
    if (c.result.is_object() && c.result.contains("label")) {
      const std::string l = c.result.at("label").get<std::string>();
      labels[l] = labels.contains(l) ? labels.at(l).get<int>() + 1 : 1;
    }
  }
  Json summary{{"schema_version", 1},
               {"spec_hash", sweep_spec_hash(pd.spec)},
               {"task", to_string(pd.spec.task)},
               {"cells", pd.cells.size()},
               {"done", done},
               {"failed", failed},
               {"complete", pd.complete},
               {"computed_this_run", pd.computed_cells},
               {"label_counts", labels},
               {"total_cell_wall_ms", wall_ms}};

  // for fixed-point census sweeps along one axis, report where the
  // equilibrium count changes (bifurcation bracketing cells)
  if (pd.spec.task == SweepTask::fixed_point_count && pd.spec.axes.size() == 1) {
    Json transitions = Json::array();
    for (std::size_t i = 0; i + 1 < pd.cells.size(); ++i) {
      const SweepCell& a = pd.cells[i];
      const SweepCell& b = pd.cells[i + 1];
      if (!a.result.is_object() || !b.result.is_object()) continue;
      const int ca = a.result.at("count").get<int>();
      const int cb = b.result.at("count").get<int>();
      if (ca != cb)
        transitions.push_back(Json{{"cells", Json::array({i, i + 1})},
                                   {"values", Json::array({a.values, b.values})},
                                   {"count_from", ca},
                                   {"count_to", cb}});
    }
    summary["count_transitions"] = std::move(transitions);
  }
  return summary;
}

}  // namespace mim
