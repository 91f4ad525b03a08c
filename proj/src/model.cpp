#include "mim/model.hpp"

#include <algorithm>
#include <cmath>

namespace mim {

void SystemParams::validate() const {
  const auto bad = [](double v) { return !std::isfinite(v); };
  if (bad(g) || g <= 0.0) throw DomainError("params.g must be finite and > 0");
  if (bad(lambda) || lambda < 0.0) throw DomainError("params.lambda must be finite and >= 0");
  if (bad(n0) || n0 < 1.0) throw DomainError("params.n0 must be finite and >= 1");
  if (bad(kappa) || kappa < 0.0) throw DomainError("params.kappa must be finite and >= 0");
  if (bad(gamma) || gamma < 0.0) throw DomainError("params.gamma must be finite and >= 0");
  if (bad(n_th) || n_th < 0.0) throw DomainError("params.n_th must be finite and >= 0");
}

bool State::finite() const {
  return std::isfinite(x) && std::isfinite(p) && std::isfinite(z) &&
         std::isfinite(phi) && std::isfinite(q);
}

double StateDerivative::max_abs() const {
  return std::max({std::fabs(dx), std::fabs(dp), std::fabs(dz),
                   std::fabs(dphi), std::fabs(dq)});
}

double wrap_phase(double phi) {
  double w = std::fmod(phi + kPi, 2.0 * kPi);
  if (w <= 0.0) w += 2.0 * kPi;
  return w - kPi;
}

StateDerivative derivatives(const State& s, const SystemParams& params) {
  if (!s.finite()) throw DomainError("derivatives: non-finite state");
  const double r2 = s.q * s.q - s.z * s.z;
  const double r = std::sqrt(std::max(r2, 0.0));
  const double r_reg = std::max(r, kEpsReg);
  const double sp = std::sin(s.phi);
  const double cp = std::cos(s.phi);

  StateDerivative d;
  d.dx = s.p - 0.5 * params.gamma * s.x;
  d.dp = -s.x - 0.5 * params.gamma * s.p - params.lambda * params.n0 * s.z;
  d.dz = 2.0 * params.g * r * sp - params.kappa * s.z;
  d.dphi = 2.0 * params.lambda * s.x - 2.0 * params.g * s.z * cp / r_reg;
  d.dq = -params.kappa * s.q + 2.0 * params.kappa * params.n_th / params.n0;
  return d;
}

double energy(const State& s, const SystemParams& params) {
  if (!s.finite()) throw DomainError("energy: non-finite state");
  if (std::fabs(s.z) > s.q) throw DomainError("energy: |z| exceeds q");
  const double r = std::sqrt(std::max(s.q * s.q - s.z * s.z, 0.0));
  return 0.5 * (s.p * s.p + s.x * s.x) + params.lambda * params.n0 * s.x * s.z +
         params.g * params.n0 * r * std::cos(s.phi);
}

Matrix5 jacobian(const State& s, const SystemParams& params, bool* near_singular) {
  if (!s.finite()) throw DomainError("jacobian: non-finite state");
  const double r2 = s.q * s.q - s.z * s.z;
  const double r = std::sqrt(std::max(r2, 0.0));
  const double sp = std::sin(s.phi);
  const double cp = std::cos(s.phi);
  const double g = params.g;

  if (near_singular) *near_singular = (r < 1e-6);

  Matrix5 j = Matrix5::Zero();
  // x row
  j(0, 0) = -0.5 * params.gamma;
  j(0, 1) = 1.0;
  // p row
  j(1, 0) = -1.0;
  j(1, 1) = -0.5 * params.gamma;
  j(1, 2) = -params.lambda * params.n0;
  // z row: z' = 2 g r sin(phi) - kappa z, with r clamped at zero when r2 <= 0
  if (r2 > 0.0) {
    j(2, 2) = -2.0 * g * (s.z / r) * sp - params.kappa;
    j(2, 3) = 2.0 * g * r * cp;
    j(2, 4) = 2.0 * g * (s.q / r) * sp;
  } else {
    j(2, 2) = -params.kappa;
  }
  // phi row: phi' = 2 lambda x - 2 g z cos(phi) / max(r, eps)
  j(3, 0) = 2.0 * params.lambda;
  if (r > kEpsReg) {
    const double r3 = r * r * r;
    j(3, 2) = -2.0 * g * cp * (s.q * s.q) / r3;
    j(3, 3) = 2.0 * g * s.z * sp / r;
    j(3, 4) = 2.0 * g * s.z * s.q * cp / r3;
  } else {
    // floored denominator: constant in z and q
    j(3, 2) = -2.0 * g * cp / kEpsReg;
    j(3, 3) = 2.0 * g * s.z * sp / kEpsReg;
  }
  // q row
  j(4, 4) = -params.kappa;
  return j;
}

double divergence(const SystemParams& params) {
  return -(params.gamma + 2.0 * params.kappa);
}

State apply_symmetry(const State& s) {
  return State{-s.x, -s.p, -s.z, wrap_phase(-s.phi), s.q};
}

ControlParams control_params(const SystemParams& params) {
  params.validate();
  ControlParams cp;
  cp.c = params.g / (params.lambda * params.lambda * params.n0);
  cp.c_damped = cp.c * (1.0 + 0.25 * params.gamma * params.gamma);
  cp.d = params.kappa / (2.0 * params.g);
  cp.q0 = 2.0 * params.n_th / params.n0;
  if (cp.q0 > 0.0) cp.c_tilde = cp.c_damped / cp.q0;
  return cp;
}

double get_param(const SystemParams& params, const std::string& name) {
  if (name == "g") return params.g;
  if (name == "lambda") return params.lambda;
  if (name == "n0") return params.n0;
  if (name == "kappa") return params.kappa;
  if (name == "gamma") return params.gamma;
  if (name == "n_th") return params.n_th;
  throw ConfigError("unknown parameter name: " + name);
}

void set_param(SystemParams& params, const std::string& name, double value) {
  if (name == "g") params.g = value;
  else if (name == "lambda") params.lambda = value;
  else if (name == "n0") params.n0 = value;
  else if (name == "kappa") params.kappa = value;
  else if (name == "gamma") params.gamma = value;
  else if (name == "n_th") params.n_th = value;
  else throw ConfigError("unknown parameter name: " + name);
}

}  // namespace mim
