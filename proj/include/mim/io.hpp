#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "mim/analysis.hpp"
#include "mim/integrate.hpp"
#include "mim/model.hpp"

namespace mim {

using Json = nlohmann::ordered_json;

/// Formats a double with 17 significant digits (round-trip exact).
std::string fmt17(double v);

Json to_json(const SystemParams& p);
Json to_json(const State& s);
Json to_json(const IntegratorConfig& c);
Json to_json(const StepStats& st);

SystemParams params_from_json(const Json& j);
State state_from_json(const Json& j);
/// Missing fields keep the passed-in defaults.
IntegratorConfig config_from_json(const Json& j, IntegratorConfig defaults = {});

/// CSV with header `t,x,p,z,phi,q,energy`, one row per sample, 17 significant
/// digits per value.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

/// Sidecar metadata: params, config, step statistics.
Json trajectory_metadata(const Trajectory& traj);

/// Trajectory as a JSON document (same columns as the CSV).
Json trajectory_to_json(const Trajectory& traj);

Json to_json(const FixedPoint& fp);

/// Scan export: arrays `grid`, `branches` (per-cell fixed-point records),
/// and `events` (type, bracketing cells, interpolated location).
Json to_json(const BifurcationScan& scan);

/// Spectrum export: exponents, horizon, renormalization interval, and the
/// running-estimate convergence trace.
Json to_json(const LyapunovResult& r);

}  // namespace mim
