#include "mim/io.hpp"

#include <cstdio>
#include <ostream>

namespace mim {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json to_json(const SystemParams& p) {
  return Json{{"g", p.g},         {"lambda", p.lambda}, {"n0", p.n0},
              {"kappa", p.kappa}, {"gamma", p.gamma},   {"n_th", p.n_th}};
}

Json to_json(const State& s) {
  return Json{{"x", s.x}, {"p", s.p}, {"z", s.z}, {"phi", s.phi}, {"q", s.q}};
}

Json to_json(const IntegratorConfig& c) {
  return Json{{"rtol", c.rtol},     {"atol", c.atol},
              {"h_init", c.h_init}, {"h_max", c.h_max},
              {"t_end", c.t_end},   {"sample_dt", c.sample_dt}};
}

Json to_json(const StepStats& st) {
  return Json{{"accepted", st.accepted},
              {"rejected", st.rejected},
              {"rhs_evals", st.rhs_evals},
              {"err_accum", st.err_accum},
              {"max_z_overshoot", st.max_z_overshoot}};
}

namespace {

double require_number(const Json& j, const char* key, const char* what) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ConfigError(std::string(what) + ": missing or non-numeric field '" + key + "'");
  return j.at(key).get<double>();
}

}  // namespace

SystemParams params_from_json(const Json& j) {
  SystemParams p;
  p.g = require_number(j, "g", "params");
  p.lambda = require_number(j, "lambda", "params");
  p.n0 = require_number(j, "n0", "params");
  p.kappa = j.contains("kappa") ? require_number(j, "kappa", "params") : 0.0;
  p.gamma = j.contains("gamma") ? require_number(j, "gamma", "params") : 0.0;
  p.n_th = j.contains("n_th") ? require_number(j, "n_th", "params") : 0.0;
  p.validate();
  return p;
}

State state_from_json(const Json& j) {
  State s;
  s.x = require_number(j, "x", "state");
  s.p = require_number(j, "p", "state");
  s.z = require_number(j, "z", "state");
  s.phi = require_number(j, "phi", "state");
  s.q = require_number(j, "q", "state");
  return s;
}

IntegratorConfig config_from_json(const Json& j, IntegratorConfig c) {
  if (j.contains("rtol")) c.rtol = require_number(j, "rtol", "config");
  if (j.contains("atol")) c.atol = require_number(j, "atol", "config");
  if (j.contains("h_init")) c.h_init = require_number(j, "h_init", "config");
  if (j.contains("h_max")) c.h_max = require_number(j, "h_max", "config");
  if (j.contains("t_end")) c.t_end = require_number(j, "t_end", "config");
  if (j.contains("sample_dt")) c.sample_dt = require_number(j, "sample_dt", "config");
  c.validate();
  return c;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  os << "t,x,p,z,phi,q,energy\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const State& s = traj.states[i];
    os << fmt17(traj.times[i]) << ',' << fmt17(s.x) << ',' << fmt17(s.p) << ','
       << fmt17(s.z) << ',' << fmt17(s.phi) << ',' << fmt17(s.q) << ','
       << fmt17(energy(s, traj.params)) << '\n';
  }
}

Json trajectory_metadata(const Trajectory& traj) {
  return Json{{"schema_version", 1},
              {"params", to_json(traj.params)},
              {"config", to_json(traj.config)},
              {"step_stats", to_json(traj.step_stats)},
              {"samples", traj.size()}};
}

Json to_json(const FixedPoint& fp) {
  Json eig = Json::array();
  for (const auto& ev : fp.eigenvalues) eig.push_back(Json::array({ev.real(), ev.imag()}));
  return Json{{"state", to_json(fp.state)},
              {"family", to_string(fp.family)},
              {"stability", to_string(fp.stability)},
              {"eigenvalues", std::move(eig)},
              {"residual_inf", fp.residual_inf},
              {"near_singular", fp.near_singular},
              {"refine_iterations", fp.refine_iterations}};
}

Json to_json(const BifurcationScan& scan) {
  Json branches = Json::array();
  for (const auto& cell : scan.branches) {
    Json points = Json::array();
    for (const FixedPoint& fp : cell) points.push_back(to_json(fp));
    branches.push_back(std::move(points));
  }
  Json events = Json::array();
  for (const BifurcationEvent& e : scan.events)
    events.push_back(Json{{"type", to_string(e.type)},
                          {"lower_cell", e.lower_cell},
                          {"upper_cell", e.upper_cell},
                          {"location", e.location}});
  return Json{{"schema_version", 1},
              {"control", scan.control},
              {"grid", scan.grid},
              {"branches", std::move(branches)},
              {"events", std::move(events)},
              {"cell_errors", scan.cell_errors}};
}

Json to_json(const LyapunovResult& r) {
  Json trace = Json::array();
  for (const auto& [t, ex] : r.trace)
    trace.push_back(Json::array({t, ex[0], ex[1], ex[2], ex[3], ex[4]}));
  return Json{{"exponents", r.exponents},
              {"sum", r.sum()},
              {"horizon", r.horizon},
              {"renorm_dt", r.renorm_dt},
              {"transient", r.transient},
              {"trace", std::move(trace)}};
}

Json trajectory_to_json(const Trajectory& traj) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const State& s = traj.states[i];
    rows.push_back(Json{{"t", traj.times[i]},
                        {"x", s.x},
                        {"p", s.p},
                        {"z", s.z},
                        {"phi", s.phi},
                        {"q", s.q},
                        {"energy", energy(s, traj.params)}});
  }
  Json j = trajectory_metadata(traj);
  j["rows"] = std::move(rows);
  return j;
}

}  // namespace mim
