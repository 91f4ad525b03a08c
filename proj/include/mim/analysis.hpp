#pragma once

#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mim/integrate.hpp"
#include "mim/model.hpp"

namespace mim {

enum class FixedPointFamily {
  symmetric_pi,    // z = 0, phi = pi
  symmetric_zero,  // z = 0, phi = 0
  broken_pair,     // symmetry-broken pair born at the pitchfork (kappa = 0)
  vacuum,          // all modes empty (q = 0)
  thermal,         // nonzero-z equilibria on the q = q0 leaf (kappa, n_th > 0)
};

enum class Stability { stable, unstable, center, saddle, marginal };

const char* to_string(FixedPointFamily f);
const char* to_string(Stability s);

/// An equilibrium of the mean-field flow. For kappa = 0 the total photon
/// number is conserved, so the q direction is exactly neutral; the stability
/// class is then decided on the remaining (x, p, z, phi) block and the
/// reported spectrum carries an explicit zero for the neutral direction.
struct FixedPoint {
  State state;
  FixedPointFamily family = FixedPointFamily::symmetric_pi;
  std::array<std::complex<double>, 5> eigenvalues{};
  Stability stability = Stability::marginal;
  double residual_inf = 0.0;
  bool near_singular = false;
  int refine_iterations = 0;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(std::string msg, State last_iterate, double residual)
      : Error(std::move(msg)), last_iterate(last_iterate), residual(residual) {}

  State last_iterate;
  double residual;
};

/// Every closed-form equilibrium for the given loss configuration, polished by
/// Newton and classified. Lossless / membrane-loss points are reported on the
/// q = 1 leaf (q is conserved there).
std::vector<FixedPoint> fixed_points_closed_form(const SystemParams& params);

/// Damped Newton iteration on derivatives(.) = 0 using the analytic Jacobian,
/// to residual inf-norm < 1e-12 (50 iterations max). For kappa = 0 the
/// neutral q direction is frozen. Throws ConvergenceError carrying the last
/// iterate on failure.
FixedPoint refine_fixed_point(const State& guess, const SystemParams& params);

/// Fills eigenvalues and the stability class (tolerance 1e-9 on real parts).
FixedPoint classify_stability(FixedPoint fp, const SystemParams& params);

struct LyapunovResult {
  std::array<double, 5> exponents{};  // descending
  double horizon = 0.0;
  double renorm_dt = 0.0;
  double transient = 0.0;
  /// (time, running exponent estimates), decimated to ~200 entries.
  std::vector<std::pair<double, std::array<double, 5>>> trace;

  [[nodiscard]] double sum() const;
};

/// Integration tolerances used by the Lyapunov routines (t_end/sample_dt are
/// ignored there).
IntegratorConfig lyapunov_tolerances();

/// Full Lyapunov spectrum by tangent-space propagation of an orthonormal
/// 5-frame with the analytic Jacobian, QR-reorthonormalized every renorm_dt.
/// Exponents average the log stretch factors after the transient.
LyapunovResult lyapunov_spectrum(const SystemParams& params, const State& s0,
                                 double horizon, double renorm_dt = 1.0,
                                 double transient = 100.0,
                                 const IntegratorConfig& tol = lyapunov_tolerances());

/// Benettin two-trajectory estimate of the largest exponent: co-integrate s0
/// and s0 + d0*e, renormalize the separation to d0 every renorm_dt, average
/// the log growth. d0 must lie in [1e-10, 1e-6].
double max_lyapunov_two_trajectory(const SystemParams& params, const State& s0,
                                   double horizon, double d0 = 1e-8,
                                   double renorm_dt = 1.0,
                                   const IntegratorConfig& tol = lyapunov_tolerances());

enum class Regime { rabi, josephson, self_trapped, chaotic, decayed };

const char* to_string(Regime r);

/// Decision thresholds for classify_regime; defaults documented in README.
struct RegimeThresholds {
  double lyap_chaos = 0.005;     ///< chaotic when the max-exponent estimate exceeds this
  double trapped_abs_z = 0.1;    ///< self-trapped needs late-time mean |z| above this
  double rabi_swing = 1.8;       ///< rabi needs max z - min z > rabi_swing * mean q
  double rabi_detuning = 0.1;    ///< rabi needs lambda N0 max|x| < rabi_detuning * g
  double decayed_fraction = 0.05;///< decayed when final q < fraction * initial q
  double lyap_horizon = 1500.0;  ///< the exponent estimate runs over max(t_end, this)
};

struct RegimeEvidence {
  double lyapunov_max = 0.0;    ///< Benettin estimate
  double z_mean_abs_late = 0.0; ///< time-averaged |z| over the last half
  int z_sign_changes = 0;       ///< sign changes of z over the whole window
  double q_final = 0.0;
  double z_swing = 0.0;         ///< max z - min z over the whole window
  double x_max_abs = 0.0;
  bool short_window = false;    ///< window shorter than 10 tunneling periods
};

struct RegimeLabel {
  Regime label = Regime::josephson;
  RegimeEvidence evidence;
};

/// Labels a finished trajectory: decayed, else self-trapped, else chaotic,
/// else rabi, else josephson (tested in that order).
RegimeLabel classify_regime(const Trajectory& traj, const SystemParams& params,
                            const RegimeThresholds& thresholds = {});

enum class BifurcationType { pitchfork, saddle_node, hopf };

const char* to_string(BifurcationType t);

struct BifurcationEvent {
  BifurcationType type;
  int lower_cell = 0;   ///< event bracketed between grid[lower_cell]
  int upper_cell = 0;   ///< and grid[upper_cell]
  double location = 0;  ///< interpolated control value
};

struct BifurcationScan {
  std::string control;                         ///< varied SystemParams field
  std::vector<double> grid;
  std::vector<std::vector<FixedPoint>> branches;  ///< per-cell fixed points
  std::vector<BifurcationEvent> events;
  std::vector<std::string> cell_errors;        ///< per-cell failure notes ("" = ok)
};

/// Enumerates fixed points on each grid cell (closed forms, Newton polish,
/// continuation from neighbors), classifies stability, and reports events:
/// branch-count changes (pitchfork when an S-invariant point flips its
/// stability class across the boundary, saddle-node otherwise) and
/// complex-pair real-part crossings on continued branches (Hopf).
BifurcationScan bifurcation_scan(const SystemParams& base, const std::string& control,
                                 const std::vector<double>& grid);

/// Median spacing of same-direction section crossings; NaN when fewer than
/// two crossings exist. Supports period tracking through Hopf cascades.
double estimate_period(const Trajectory& traj, const SectionSpec& spec);

/// Area of the convex hull of a planar point set (monotone chain + shoelace).
double convex_hull_area(std::span<const std::pair<double, double>> pts);

}  // namespace mim
