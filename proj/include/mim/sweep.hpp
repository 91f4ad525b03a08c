#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mim/analysis.hpp"
#include "mim/io.hpp"

namespace mim {

enum class SweepTask { classify_regime, max_lyapunov, final_state, fixed_point_count };

const char* to_string(SweepTask t);
SweepTask sweep_task_from_string(const std::string& s);

struct SweepAxis {
  std::string param;          ///< SystemParams field name
  std::vector<double> values; ///< strictly monotone grid
};

struct LyapunovOptions {
  double horizon = 1000.0;
  double renorm_dt = 1.0;
  double d0 = 1e-8;
};

/// Declarative description of a parameter-grid sweep. The default initial
/// state (when none is given) is x = p = phi = 0, z = 0.95, q = 1.
struct SweepSpec {
  SystemParams base;
  std::vector<SweepAxis> axes;  ///< 1 or 2 axes, row-major cell order
  SweepTask task = SweepTask::classify_regime;
  IntegratorConfig integrator;
  LyapunovOptions lyapunov;
  RegimeThresholds thresholds;
  std::optional<State> initial_state;  ///< nullopt = default above
  unsigned workers = 1;
  std::string checkpoint_path;  ///< empty = no checkpointing

  void validate() const;
  [[nodiscard]] std::size_t cell_count() const;
  [[nodiscard]] State initial() const;
};

struct SweepCell {
  std::array<int, 2> index{0, 0};  ///< axis indices (second 0 for 1-D sweeps)
  Json values;                     ///< axis parameter values
  Json result;                     ///< task result, null on failure
  std::string error;               ///< failure note, empty when ok
  double wall_ms = 0.0;            ///< not exported (volatile)
  bool done = false;
};

struct PhaseDiagram {
  SweepSpec spec;
  std::vector<SweepCell> cells;  ///< row-major over axes
  bool complete = false;
  std::size_t computed_cells = 0;  ///< cells computed in this run (not loaded)
};

/// Canonical spec serialization. workers and checkpoint_path are execution
/// details and are excluded from the hash.
Json sweep_spec_to_json(const SweepSpec& spec);
SweepSpec sweep_spec_from_json(const Json& j);
std::string sweep_spec_hash(const SweepSpec& spec);

/// Runs every cell exactly once on a pool of `workers` threads. Results are
/// bitwise-independent of the worker count. If spec.checkpoint_path names an
/// existing checkpoint, the run resumes from it (spec hash must match). At
/// most max_cells new cells are computed (the checkpoint then holds a partial
/// sweep that resume_sweep can finish).
PhaseDiagram run_sweep(const SweepSpec& spec,
                       std::size_t max_cells = std::numeric_limits<std::size_t>::max());

/// Resumes from a checkpoint file, computing only the missing cells.
PhaseDiagram resume_sweep(const std::string& checkpoint_path,
                          std::size_t max_cells = std::numeric_limits<std::size_t>::max());

/// NDJSON export: header line (schema_version, spec hash), then one line per
/// cell in row-major order. Deterministic byte-for-byte for a given spec.
void write_phase_diagram_ndjson(const PhaseDiagram& pd, std::ostream& os);

/// Aggregate summary (cell counts, failures, label histogram where present).
Json phase_diagram_summary(const PhaseDiagram& pd);

}  // namespace mim
