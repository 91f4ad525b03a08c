#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace mim {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Floor applied to sqrt(q^2 - z^2) in the denominator of the phase equation.
/// The (z, phi) chart is singular where one mode empties (|z| -> q); the
/// singularity is a coordinate artifact (the Cartesian-amplitude picture is
/// regular there), so the field is kept finite by flooring the root.
inline constexpr double kEpsReg = 1e-12;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid physical input (non-finite values, out-of-range parameters,
/// inadmissible states).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (tolerances, grids, spec files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Physical constants of the two-mode cavity + membrane system.
/// All rates are in units of the membrane frequency, time in its inverse.
struct SystemParams {
  double g = 0.2;       ///< photon tunneling rate (> 0)
  double lambda = 0.1;  ///< optomechanical coupling (>= 0)
  double n0 = 1000.0;   ///< photon number at t = 0 (>= 1)
  double kappa = 0.0;   ///< photon decay rate (>= 0)
  double gamma = 0.0;   ///< phonon decay rate (>= 0)
  double n_th = 0.0;    ///< thermal photon number (>= 0)

  /// Throws DomainError naming the offending field.
  void validate() const;

  bool operator==(const SystemParams&) const = default;
};

/// Mean-field state: membrane displacement/momentum, photon inversion
/// z = (n_a - n_b)/N0, phase difference phi = arg(a^dag b) in (-pi, pi],
/// and photon loss fraction q = (n_a + n_b)/N0.
struct State {
  double x = 0.0;
  double p = 0.0;
  double z = 0.0;
  double phi = 0.0;
  double q = 1.0;

  [[nodiscard]] bool finite() const;
  [[nodiscard]] std::array<double, 5> to_array() const { return {x, p, z, phi, q}; }
  static State from_array(const std::array<double, 5>& a) {
    return State{a[0], a[1], a[2], a[3], a[4]};
  }

  bool operator==(const State&) const = default;
};

/// Time derivatives of the five state variables.
struct StateDerivative {
  double dx = 0.0;
  double dp = 0.0;
  double dz = 0.0;
  double dphi = 0.0;
  double dq = 0.0;

  [[nodiscard]] std::array<double, 5> to_array() const { return {dx, dp, dz, dphi, dq}; }
  [[nodiscard]] double max_abs() const;
};

/// Dimensionless control parameters governing the bifurcation structure.
struct ControlParams {
  double c = 0.0;                   ///< C = g / (lambda^2 N0)
  double c_damped = 0.0;            ///< C (1 + gamma^2/4)
  double d = 0.0;                   ///< D = kappa / (2 g)
  double q0 = 0.0;                  ///< 2 N_th / N0
  std::optional<double> c_tilde;    ///< C (1 + gamma^2/4) / q0, defined when q0 > 0
};

using Matrix5 = Eigen::Matrix<double, 5, 5>;

/// Wraps an angle into the canonical branch (-pi, pi].
double wrap_phase(double phi);

/// Right-hand side of the mean-field equations of motion:
///   x' = p - gamma x / 2
///   p' = -x - gamma p / 2 - lambda N0 z
///   z' = 2 g sqrt(q^2 - z^2) sin(phi) - kappa z
///   phi' = 2 lambda x - 2 g z cos(phi) / sqrt(q^2 - z^2)
///   q' = -kappa q + 2 kappa N_th / N0
/// The root in the phi' denominator is floored at kEpsReg.
StateDerivative derivatives(const State& s, const SystemParams& params);

/// First integral of the lossless flow (validated numerically by the tests):
///   E = p^2/2 + x^2/2 + lambda N0 x z + g N0 sqrt(q^2 - z^2) cos(phi)
/// Requires |z| <= q.
double energy(const State& s, const SystemParams& params);

/// Analytic Jacobian of `derivatives`, consistent with the regularized field.
/// Its trace is -(gamma + 2 kappa) at every admissible state. When the state
/// is close to the chart singularity (sqrt(q^2-z^2) < 1e-6) the optional flag
/// is set; entries are then large and should be treated with caution.
Matrix5 jacobian(const State& s, const SystemParams& params,
                 bool* near_singular = nullptr);

/// State-independent phase-space divergence, -(gamma + 2 kappa).
double divergence(const SystemParams& params);

/// The parity S: (x, p, z, phi, q) -> (-x, -p, -z, -phi, q), phi re-wrapped.
/// Broken-symmetry fixed points come in S-conjugate pairs.
State apply_symmetry(const State& s);

/// Derived dimensionless control parameters. c is +inf when lambda = 0.
ControlParams control_params(const SystemParams& params);

inline constexpr std::array<const char*, 6> kParamNames = {
    "g", "lambda", "n0", "kappa", "gamma", "n_th"};

double get_param(const SystemParams& params, const std::string& name);
void set_param(SystemParams& params, const std::string& name, double value);

}  // namespace mim
