#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mim/model.hpp"

namespace mim {

struct IntegratorConfig {
  double rtol = 1e-9;      ///< relative tolerance
  double atol = 1e-12;     ///< absolute tolerance
  double h_init = 1e-3;    ///< initial step
  double h_max = 0.1;      ///< maximum step
  double t_end = 200.0;    ///< horizon, units of 1/omega_m
  double sample_dt = 0.01; ///< output sampling interval

  void validate() const;  // throws ConfigError
  bool operator==(const IntegratorConfig&) const = default;
};

struct StepStats {
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t rhs_evals = 0;
  /// Accumulated per-component embedded error estimates over accepted steps,
  /// in (x, p, z, phi, q) order.
  std::array<double, 5> err_accum{};
  /// Largest raw |z| - q excess seen before storage clamping.
  double max_z_overshoot = 0.0;
};

/// Dense-sampled solution. phi is stored wrapped to (-pi, pi] even though the
/// integration itself runs on the unwrapped phase. Chaotic trajectories are
/// pointwise-meaningful only on short horizons; long-horizon output should be
/// read statistically (regime labels, sections, exponents).
struct Trajectory {
  std::vector<double> times;   ///< strictly increasing, starts at 0
  std::vector<State> states;   ///< same length as times
  SystemParams params;
  IntegratorConfig config;
  StepStats step_stats;

  [[nodiscard]] std::size_t size() const { return times.size(); }
};

class IntegrationError : public Error {
 public:
  enum class Kind { stepsize_underflow, divergence };

  IntegrationError(Kind kind, std::string msg, Trajectory partial)
      : Error(std::move(msg)), kind(kind), partial(std::move(partial)) {}

  Kind kind;
  Trajectory partial;  ///< samples accumulated before the failure
};

enum class SectionCoord { x, p, z, phi, q };
enum class SectionDirection { rising, falling, both };

struct SectionSpec {
  SectionCoord coordinate = SectionCoord::x;
  double level = 0.0;
  SectionDirection direction = SectionDirection::both;
};

struct SectionCrossing {
  double time;
  State state;
};

/// Integrates the mean-field equations from s0 over [0, config.t_end].
/// Requires |z0| <= q0; an exact-boundary |z0| = q0 input is nudged to
/// q0 (1 - 1e-9) since the (z, phi) chart is singular there.
Trajectory integrate(const SystemParams& params, const State& s0,
                     const IntegratorConfig& config);

/// Cross-validation integrator in Cartesian mode amplitudes (x, p, alpha,
/// beta), free of the sqrt(q^2 - z^2) pole. Only valid for n_th = 0.
Trajectory integrate_cartesian_oracle(const SystemParams& params, const State& s0,
                                      const IntegratorConfig& config);

/// Locates transversal level crossings on the sampled trajectory using a
/// cubic Hermite interpolant (states plus exact derivatives at the samples).
/// Grazing (tangential) contacts are discarded; for phi sections, sample
/// intervals containing the branch seam are skipped.
std::vector<SectionCrossing> section_crossings(const Trajectory& traj,
                                               const SectionSpec& spec);

}  // namespace mim
