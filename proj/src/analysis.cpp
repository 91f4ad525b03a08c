#include "mim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Dense>

#include "mim/dopri5.hpp"

namespace mim {

const char* to_string(FixedPointFamily f) {
  switch (f) {
    case FixedPointFamily::symmetric_pi: return "symmetric_pi";
    case FixedPointFamily::symmetric_zero: return "symmetric_zero";
    case FixedPointFamily::broken_pair: return "broken_pair";
    case FixedPointFamily::vacuum: return "vacuum";
    case FixedPointFamily::thermal: return "thermal";
  }
  return "?";
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::center: return "center";
    case Stability::saddle: return "saddle";
    case Stability::marginal: return "marginal";
  }
  return "?";
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::rabi: return "rabi";
    case Regime::josephson: return "josephson";
    case Regime::self_trapped: return "self_trapped";
    case Regime::chaotic: return "chaotic";
    case Regime::decayed: return "decayed";
  }
  return "?";
}

const char* to_string(BifurcationType t) {
  switch (t) {
    case BifurcationType::pitchfork: return "pitchfork";
    case BifurcationType::saddle_node: return "saddle_node";
    case BifurcationType::hopf: return "hopf";
  }
  return "?";
}

namespace {

constexpr double kResidualTarget = 1e-12;
// Near the chart pole the residual floor is gradient-amplified ulp noise
// (one ulp of z moves phi' by ~2g q^2 ulp / r^3); a stalled iteration below
// this bound still satisfies the reporting invariant.
constexpr double kResidualFloor = 1e-10;
constexpr double kStabilityTol = 1e-9;

/// Distance with x and p measured against the broken-branch scale lambda*N0,
/// phi measured on the circle.
double scaled_dist(const State& a, const State& b, const SystemParams& params) {
  const double sx = std::max(1.0, params.lambda * params.n0);
  const double dx = (a.x - b.x) / sx;
  const double dp = (a.p - b.p) / sx;
  const double dz = a.z - b.z;
  const double dphi = wrap_phase(a.phi - b.phi);
  const double dq = a.q - b.q;
  return std::sqrt(dx * dx + dp * dp + dz * dz + dphi * dphi + dq * dq);
}

FixedPointFamily infer_family(const State& s, const SystemParams& params) {
  if (s.q < 1e-8) return FixedPointFamily::vacuum;
  if (std::fabs(s.z) < 1e-8) {
    return std::fabs(wrap_phase(s.phi - kPi)) < std::fabs(wrap_phase(s.phi))
               ? FixedPointFamily::symmetric_pi
               : FixedPointFamily::symmetric_zero;
  }
  return (params.kappa > 0.0 && params.n_th > 0.0) ? FixedPointFamily::thermal
                                                   : FixedPointFamily::broken_pair;
}

}  // namespace

FixedPoint classify_stability(FixedPoint fp, const SystemParams& params) {
  bool near_sing = false;
  const Matrix5 j = jacobian(fp.state, params, &near_sing);
  fp.near_singular = near_sing;

  std::vector<std::complex<double>> relevant;
  if (fp.state.q < 1e-8 && std::fabs(fp.state.z) < 1e-8) {
    // Vacuum: the phase is pure gauge (its Jacobian column is exactly zero,
    // while the floored phi row carries meaningless 1/eps entries that would
    // poison a dense eigensolve). Classify on the (x, p, z, q) block and
    // report the gauge direction as an explicit zero.
    Eigen::Matrix4d block;
    const int keep[4] = {0, 1, 2, 4};
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) block(r, c) = j(keep[r], keep[c]);
    Eigen::EigenSolver<Eigen::Matrix4d> es(block);
    if (es.info() != Eigen::Success) throw Error("eigensolver failed");
    for (int i = 0; i < 4; ++i) relevant.push_back(es.eigenvalues()(i));
    for (int i = 0; i < 4; ++i) fp.eigenvalues[i] = relevant[i];
    fp.eigenvalues[4] = {0.0, 0.0};
  } else if (params.kappa == 0.0) {
    // total photon number is conserved: the q direction is exactly neutral
    // and excluded from the class; its zero is still reported.
    const Eigen::Matrix4d block = j.topLeftCorner<4, 4>();
    Eigen::EigenSolver<Eigen::Matrix4d> es(block);
    if (es.info() != Eigen::Success) throw Error("eigensolver failed");
    for (int i = 0; i < 4; ++i) relevant.push_back(es.eigenvalues()(i));
    for (int i = 0; i < 4; ++i) fp.eigenvalues[i] = relevant[i];
    fp.eigenvalues[4] = {0.0, 0.0};
  } else {
    Eigen::EigenSolver<Matrix5> es(j);
    if (es.info() != Eigen::Success) throw Error("eigensolver failed");
    for (int i = 0; i < 5; ++i) relevant.push_back(es.eigenvalues()(i));
    for (int i = 0; i < 5; ++i) fp.eigenvalues[i] = relevant[i];
  }
  std::sort(fp.eigenvalues.begin(), fp.eigenvalues.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (a.real() != b.real()) return a.real() > b.real();
              return a.imag() > b.imag();
            });

  double max_re = -std::numeric_limits<double>::infinity();
  double min_re = std::numeric_limits<double>::infinity();
  double max_im = 0.0;
  for (const auto& ev : relevant) {
    max_re = std::max(max_re, ev.real());
    min_re = std::min(min_re, ev.real());
    max_im = std::max(max_im, std::fabs(ev.imag()));
  }

  if (max_re < -kStabilityTol) {
    fp.stability = Stability::stable;
  } else if (max_re > kStabilityTol) {
    fp.stability = (min_re < -kStabilityTol) ? Stability::saddle : Stability::unstable;
  } else if (min_re >= -kStabilityTol) {
    fp.stability = (max_im > kStabilityTol) ? Stability::center : Stability::marginal;
  } else {
    fp.stability = Stability::marginal;
  }
  return fp;
}

FixedPoint refine_fixed_point(const State& guess, const SystemParams& params) {
  params.validate();
  if (!guess.finite()) throw DomainError("refine_fixed_point: non-finite guess");
  const double r2 = guess.q * guess.q - guess.z * guess.z;
  if (!(r2 > kEpsReg * kEpsReg))
    throw DomainError("refine_fixed_point: guess too close to the |z| = q singularity");

  State s = guess;
  StateDerivative f = derivatives(s, params);
  double res = f.max_abs();
  const bool freeze_q = (params.kappa == 0.0);
  int it = 0;

  while (res > kResidualTarget && it < 50) {
    const Matrix5 j = jacobian(s, params);
    Eigen::Matrix<double, 5, 1> step = Eigen::Matrix<double, 5, 1>::Zero();

    if (freeze_q) {
      const Eigen::Matrix4d a = j.topLeftCorner<4, 4>();
      Eigen::Vector4d rhs;
      rhs << -f.dx, -f.dp, -f.dz, -f.dphi;
      Eigen::FullPivLU<Eigen::Matrix4d> lu(a);
      Eigen::Vector4d d;
      if (lu.isInvertible()) {
        d = lu.solve(rhs);
      } else {
        const Eigen::Matrix4d reg =
            a.transpose() * a + 1e-10 * Eigen::Matrix4d::Identity();
        d = reg.ldlt().solve(a.transpose() * rhs);
      }
      step.head<4>() = d;
    } else {
      Eigen::Matrix<double, 5, 1> rhs;
      rhs << -f.dx, -f.dp, -f.dz, -f.dphi, -f.dq;
      Eigen::FullPivLU<Matrix5> lu(j);
      if (lu.isInvertible()) {
        step = lu.solve(rhs);
      } else {
        const Matrix5 reg = j.transpose() * j + 1e-10 * Matrix5::Identity();
        step = reg.ldlt().solve(j.transpose() * rhs);
      }
    }

    bool moved = false;
    double alpha = 1.0;
    for (int k = 0; k < 13; ++k, alpha *= 0.5) {
      State cand{s.x + alpha * step(0), s.p + alpha * step(1), s.z + alpha * step(2),
                 s.phi + alpha * step(3), s.q + alpha * step(4)};
      if (!cand.finite() || cand.q < 0.0) continue;
      if (!(cand.q * cand.q - cand.z * cand.z > kEpsReg * kEpsReg)) continue;
      const StateDerivative fc = derivatives(cand, params);
      const double rc = fc.max_abs();
      if (rc < res * (1.0 - 0.25 * alpha) || rc <= kResidualTarget) {
        s = cand;
        f = fc;
        res = rc;
        moved = true;
        break;
      }
    }
    ++it;
    if (!moved) {
      if (res < kResidualFloor) break;  // converged to the representable floor
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3e", res);
      throw ConvergenceError(std::string("Newton refinement stalled (residual ") +
                                 buf + ")",
                             s, res);
    }
  }
  if (res > kResidualFloor)
    throw ConvergenceError("Newton refinement did not converge in 50 iterations", s, res);

  s.phi = wrap_phase(s.phi);
  FixedPoint fp;
  fp.state = s;
  fp.residual_inf = derivatives(s, params).max_abs();
  fp.refine_iterations = it;
  fp.family = infer_family(s, params);
  return classify_stability(std::move(fp), params);
}

std::vector<FixedPoint> fixed_points_closed_form(const SystemParams& params) {
  params.validate();
  const ControlParams cp = control_params(params);
  const double damp = 1.0 + 0.25 * params.gamma * params.gamma;

  std::vector<FixedPoint> pts;
  const auto add = [&](const State& s, FixedPointFamily fam) {
    for (const FixedPoint& have : pts)
      if (scaled_dist(have.state, s, params) < 1e-8) return;
    const double res = derivatives(s, params).max_abs();
    FixedPoint fp;
    if (res > kResidualTarget) {
      fp = refine_fixed_point(s, params);
    } else {
      fp.state = s;
      fp.residual_inf = res;
      fp.refine_iterations = 0;
      fp = classify_stability(std::move(fp), params);
    }
    fp.family = fam;
    pts.push_back(std::move(fp));
  };

  if (params.kappa == 0.0) {
    // photon number conserved: equilibria reported on the q = 1 leaf
    add(State{0, 0, 0, kPi, 1}, FixedPointFamily::symmetric_pi);
    add(State{0, 0, 0, 0, 1}, FixedPointFamily::symmetric_zero);
    if (cp.c_damped < 1.0) {
      const double zs = std::sqrt(1.0 - cp.c_damped * cp.c_damped);
      for (const double sign : {1.0, -1.0}) {
        const double z = sign * zs;
        const double x = -params.lambda * params.n0 * z / damp;
        add(State{x, 0.5 * params.gamma * x, z, kPi, 1},
            FixedPointFamily::broken_pair);
      }
    }
  } else if (params.n_th == 0.0) {
    add(State{0, 0, 0, 0, 0}, FixedPointFamily::vacuum);
  } else {
    const double q0 = cp.q0;
    add(State{0, 0, 0, kPi, q0}, FixedPointFamily::symmetric_pi);
    add(State{0, 0, 0, 0, q0}, FixedPointFamily::symmetric_zero);
    // nonzero-z equilibria: with w = (q^2 - z^2)/q0^2,
    //   w^2 - Ct^2 (1 + D^2) w + D^2 Ct^2 = 0,
    // real roots in (0, 1) exist for Ct >= 2D/(1+D^2).
    const double ct = *cp.c_tilde;
    const double b = ct * ct * (1.0 + cp.d * cp.d);
    const double c = cp.d * cp.d * ct * ct;
    const double disc = b * b - 4.0 * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (const double w : {0.5 * (b + sq), 0.5 * (b - sq)}) {
        if (!(w > 1e-12 && w < 1.0 - 1e-12)) continue;
        const double u = q0 * std::sqrt(w);
        const double zmag = q0 * std::sqrt(1.0 - w);
        for (const double sign : {1.0, -1.0}) {
          const double z = sign * zmag;
          const double phi = std::atan2(cp.d * z / u, -u / (q0 * ct));
          const double x = -params.lambda * params.n0 * z / damp;
          add(State{x, 0.5 * params.gamma * x, z, phi, q0},
              FixedPointFamily::thermal);
        }
      }
    }
  }

  std::sort(pts.begin(), pts.end(), [](const FixedPoint& a, const FixedPoint& b) {
    if (a.state.z != b.state.z) return a.state.z < b.state.z;
    return a.state.phi < b.state.phi;
  });
  return pts;
}

// ---------------------------------------------------------------------------
// Lyapunov exponents
// ---------------------------------------------------------------------------

namespace {

void fill_nan(double* dst, int n) {
  for (int i = 0; i < n; ++i) dst[i] = std::numeric_limits<double>::quiet_NaN();
}

void mean_field_rhs(const SystemParams& pr, const double* y, double* dy) {
  const double x = y[0], p = y[1], z = y[2], phi = y[3], q = y[4];
  const double r = std::sqrt(std::max(q * q - z * z, 0.0));
  const double r_reg = std::max(r, kEpsReg);
  const double sp = std::sin(phi);
  const double cp = std::cos(phi);
  dy[0] = p - 0.5 * pr.gamma * x;
  dy[1] = -x - 0.5 * pr.gamma * p - pr.lambda * pr.n0 * z;
  dy[2] = 2.0 * pr.g * r * sp - pr.kappa * z;
  dy[3] = 2.0 * pr.lambda * x - 2.0 * pr.g * z * cp / r_reg;
  dy[4] = -pr.kappa * q + 2.0 * pr.kappa * pr.n_th / pr.n0;
}

bool finite5(const double* y) {
  for (int i = 0; i < 5; ++i)
    if (!std::isfinite(y[i])) return false;
  return true;
}

// state + 5x5 tangent frame (column-major), evolved with the analytic Jacobian
struct VariationalRhs {
  static constexpr int dim = 30;
  SystemParams pr;

  void operator()(double, const double* y, double* dy) const {
    if (!finite5(y)) {
      fill_nan(dy, dim);
      return;
    }
    mean_field_rhs(pr, y, dy);
    const State s{y[0], y[1], y[2], y[3], y[4]};
    const Matrix5 j = jacobian(s, pr);
    Eigen::Map<const Matrix5> v(y + 5);
    Eigen::Map<Matrix5> dv(dy + 5);
    dv = j * v;
  }
};

struct PairRhs {
  static constexpr int dim = 10;
  SystemParams pr;

  void operator()(double, const double* y, double* dy) const {
    if (!finite5(y) || !finite5(y + 5)) {
      fill_nan(dy, dim);
      return;
    }
    mean_field_rhs(pr, y, dy);
    mean_field_rhs(pr, y + 5, dy + 5);
  }
};

State prepare_initial(const SystemParams& params, const State& s0) {
  params.validate();
  if (!s0.finite()) throw DomainError("initial state has non-finite components");
  if (s0.q < 0.0) throw DomainError("initial q must be >= 0");
  if (std::fabs(s0.z) > s0.q) throw DomainError("initial |z| exceeds q");
  State s = s0;
  s.phi = wrap_phase(s.phi);
  if (s.q > 0.0 && std::fabs(s.z) == s.q)
    s.z = std::copysign(s.q * (1.0 - 1e-9), s.z);
  return s;
}

[[noreturn]] void throw_integration_failure(StepStatus st, double t) {
  Trajectory empty;
  if (st == StepStatus::underflow)
    throw IntegrationError(IntegrationError::Kind::stepsize_underflow,
                           "step size underflow at t = " + std::to_string(t), empty);
  throw IntegrationError(IntegrationError::Kind::divergence,
                         "solution diverged near t = " + std::to_string(t), empty);
}

}  // namespace

IntegratorConfig lyapunov_tolerances() {
  IntegratorConfig c;
  c.rtol = 1e-8;
  c.atol = 1e-10;
  return c;
}

double LyapunovResult::sum() const {
  double s = 0.0;
  for (double e : exponents) s += e;
  return s;
}

LyapunovResult lyapunov_spectrum(const SystemParams& params, const State& s0,
                                 double horizon, double renorm_dt, double transient,
                                 const IntegratorConfig& tol) {
  if (!(renorm_dt > 0.0) || !(horizon > renorm_dt))
    throw ConfigError("lyapunov_spectrum: need horizon > renorm_dt > 0");
  if (!(transient >= 0.0) || !(transient < horizon))
    throw ConfigError("lyapunov_spectrum: need 0 <= transient < horizon");

  const State start = prepare_initial(params, s0);
  std::array<double, 30> y{};
  const auto sa = start.to_array();
  std::copy(sa.begin(), sa.end(), y.begin());
  for (int i = 0; i < 5; ++i) y[5 + 6 * i] = 1.0;  // identity frame

  Dopri5<VariationalRhs> stepper(VariationalRhs{params},
                                 StepControl{tol.rtol, tol.atol, tol.h_init, tol.h_max});
  stepper.init(0.0, y);

  std::array<double, 5> logsum{};
  double t_start = std::ceil((transient - 1e-12) / renorm_dt) * renorm_dt;
  if (t_start < 0.0) t_start = 0.0;

  LyapunovResult out;
  out.horizon = horizon;
  out.renorm_dt = renorm_dt;
  out.transient = transient;

  const auto n_intervals = static_cast<std::size_t>(std::ceil(horizon / renorm_dt - 1e-9));
  const std::size_t trace_stride = std::max<std::size_t>(1, n_intervals / 200);
  double t_prev_boundary = 0.0;

  for (std::size_t k = 1; k <= n_intervals; ++k) {
    const double t_target = std::min(static_cast<double>(k) * renorm_dt, horizon);
    while (stepper.t() < t_target) {
      const StepStatus st = stepper.advance(t_target);
      if (st == StepStatus::underflow || st == StepStatus::nonfinite)
        throw_integration_failure(st, stepper.t());
    }

    std::array<double, 30> cur = stepper.y();
    Eigen::Map<Matrix5> v(cur.data() + 5);
    Eigen::HouseholderQR<Matrix5> qr(v);
    Matrix5 qm = qr.householderQ();
    const Matrix5 rm = qr.matrixQR().triangularView<Eigen::Upper>();
    const bool accumulate = (t_prev_boundary >= t_start - 1e-12);
    for (int i = 0; i < 5; ++i) {
      double d = rm(i, i);
      if (d < 0.0) {
        qm.col(i) = -qm.col(i);
        d = -d;
      }
      if (accumulate) logsum[i] += std::log(std::max(d, 1e-300));
    }
    v = qm;
    stepper.set_y(cur);

    if (accumulate && (k % trace_stride == 0 || k == n_intervals)) {
      const double span = t_target - t_start;
      if (span > 0.0) {
        std::array<double, 5> running;
        for (int i = 0; i < 5; ++i) running[i] = logsum[i] / span;
        std::sort(running.rbegin(), running.rend());
        out.trace.emplace_back(t_target, running);
      }
    }
    t_prev_boundary = t_target;
  }

  const double span = horizon - t_start;
  if (!(span > 0.0)) throw ConfigError("lyapunov_spectrum: transient leaves no window");
  for (int i = 0; i < 5; ++i) out.exponents[i] = logsum[i] / span;
  std::sort(out.exponents.rbegin(), out.exponents.rend());
  return out;
}

double max_lyapunov_two_trajectory(const SystemParams& params, const State& s0,
                                   double horizon, double d0, double renorm_dt,
                                   const IntegratorConfig& tol) {
  if (!(d0 >= 1e-10 && d0 <= 1e-6))
    throw ConfigError("max_lyapunov_two_trajectory: d0 must lie in [1e-10, 1e-6]");
  if (!(renorm_dt > 0.0) || !(horizon > renorm_dt))
    throw ConfigError("max_lyapunov_two_trajectory: need horizon > renorm_dt > 0");

  const State start = prepare_initial(params, s0);
  const double e = d0 / std::sqrt(5.0);
  std::array<double, 10> y{};
  const auto sa = start.to_array();
  for (int i = 0; i < 5; ++i) {
    y[i] = sa[i];
    y[5 + i] = sa[i] + e;
  }

  Dopri5<PairRhs> stepper(PairRhs{params},
                          StepControl{tol.rtol, tol.atol, tol.h_init, tol.h_max});
  stepper.init(0.0, y);

  double logsum = 0.0;
  const auto n = static_cast<std::size_t>(std::ceil(horizon / renorm_dt - 1e-9));
  for (std::size_t k = 1; k <= n; ++k) {
    const double t_target = std::min(static_cast<double>(k) * renorm_dt, horizon);
    while (stepper.t() < t_target) {
      const StepStatus st = stepper.advance(t_target);
      if (st == StepStatus::underflow || st == StepStatus::nonfinite)
        throw_integration_failure(st, stepper.t());
    }
    std::array<double, 10> cur = stepper.y();
    double d2 = 0.0;
    for (int i = 0; i < 5; ++i) {
      const double di = cur[5 + i] - cur[i];
      d2 += di * di;
    }
    const double d = std::sqrt(std::max(d2, 1e-300));
    logsum += std::log(d / d0);
    const double scale = d0 / d;
    for (int i = 0; i < 5; ++i) cur[5 + i] = cur[i] + (cur[5 + i] - cur[i]) * scale;
    stepper.set_y(cur);
  }
  return logsum / (static_cast<double>(n) * renorm_dt);
}

// ---------------------------------------------------------------------------
// Regime classification
// ---------------------------------------------------------------------------

RegimeLabel classify_regime(const Trajectory& traj, const SystemParams& params,
                            const RegimeThresholds& th) {
  if (traj.size() < 2) throw DomainError("classify_regime: trajectory too short");
  params.validate();

  const double t_end = traj.times.back();
  RegimeEvidence ev;
  ev.short_window = t_end < 10.0 * kPi / params.g;
  ev.q_final = traj.states.back().q;
  const double q_init = traj.states.front().q;

  std::size_t half = 0;
  while (half < traj.size() && traj.times[half] < 0.5 * t_end) ++half;

  double z_min = traj.states[0].z, z_max = traj.states[0].z;
  double q_sum = 0.0;
  int sign_changes = 0, sign_changes_late = 0;
  double abs_z_late = 0.0;
  std::size_t n_late = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const State& s = traj.states[i];
    z_min = std::min(z_min, s.z);
    z_max = std::max(z_max, s.z);
    q_sum += s.q;
    ev.x_max_abs = std::max(ev.x_max_abs, std::fabs(s.x));
    if (i + 1 < traj.size() && traj.states[i].z * traj.states[i + 1].z < 0.0) {
      ++sign_changes;
      if (i >= half) ++sign_changes_late;
    }
    if (i >= half) {
      abs_z_late += std::fabs(s.z);
      ++n_late;
    }
  }
  ev.z_sign_changes = sign_changes;
  ev.z_swing = z_max - z_min;
  ev.z_mean_abs_late = n_late ? abs_z_late / static_cast<double>(n_late) : 0.0;
  const double q_mean = q_sum / static_cast<double>(traj.size());

  ev.lyapunov_max = max_lyapunov_two_trajectory(
      params, traj.states.front(), std::max(t_end, th.lyap_horizon), 1e-8, 1.0);

  RegimeLabel out;
  out.evidence = ev;
  if (ev.q_final < th.decayed_fraction * q_init) {
    out.label = Regime::decayed;
  } else if (sign_changes_late == 0 && ev.z_mean_abs_late > th.trapped_abs_z) {
    out.label = Regime::self_trapped;
  } else if (ev.lyapunov_max > th.lyap_chaos) {
    out.label = Regime::chaotic;
  } else if (params.lambda * params.n0 * ev.x_max_abs < th.rabi_detuning * params.g &&
             ev.z_swing > th.rabi_swing * q_mean) {
    out.label = Regime::rabi;
  } else {
    out.label = Regime::josephson;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bifurcation scan
// ---------------------------------------------------------------------------

namespace {

bool is_symmetric_invariant(const FixedPoint& fp, const SystemParams& params) {
  return scaled_dist(fp.state, apply_symmetry(fp.state), params) < 1e-6;
}

/// Largest real part among eigenvalues with |Im| > tol (complex pairs).
double leading_complex_re(const FixedPoint& fp) {
  double r = -std::numeric_limits<double>::infinity();
  for (const auto& ev : fp.eigenvalues)
    if (std::fabs(ev.imag()) > 1e-6) r = std::max(r, ev.real());
  return r;
}

/// Largest real part among real-axis eigenvalues (|Im| <= tol).
double leading_real_axis_re(const FixedPoint& fp) {
  double r = -std::numeric_limits<double>::infinity();
  for (const auto& ev : fp.eigenvalues)
    if (std::fabs(ev.imag()) <= 1e-6) r = std::max(r, ev.real());
  return r;
}

const FixedPoint* nearest(const std::vector<FixedPoint>& cell, const State& s,
                          const SystemParams& params, double max_dist) {
  const FixedPoint* best = nullptr;
  double bd = max_dist;
  for (const FixedPoint& fp : cell) {
    const double d = scaled_dist(fp.state, s, params);
    if (d < bd) {
      bd = d;
      best = &fp;
    }
  }
  return best;
}

}  // namespace

BifurcationScan bifurcation_scan(const SystemParams& base, const std::string& control,
                                 const std::vector<double>& grid) {
  base.validate();
  get_param(base, control);  // validates the name
  if (grid.size() < 3) throw ConfigError("bifurcation_scan: grid needs >= 3 points");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double d0 = grid[1] - grid[0];
    const double di = grid[i + 1] - grid[i];
    if (di == 0.0 || (di > 0.0) != (d0 > 0.0))
      throw ConfigError("bifurcation_scan: grid must be strictly monotone");
  }

  BifurcationScan scan;
  scan.control = control;
  scan.grid = grid;
  scan.branches.resize(grid.size());
  scan.cell_errors.resize(grid.size());

  std::vector<SystemParams> cell_params(grid.size(), base);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    set_param(cell_params[i], control, grid[i]);
    try {
      scan.branches[i] = fixed_points_closed_form(cell_params[i]);
    } catch (const Error& e) {
      scan.cell_errors[i] = e.what();
    }
  }

  // continuation: seed each cell with its neighbors' roots, both directions
  const auto continue_from = [&](std::size_t from, std::size_t to) {
    for (const FixedPoint& fp : scan.branches[from]) {
      try {
        FixedPoint cont = refine_fixed_point(fp.state, cell_params[to]);
        bool known = false;
        for (const FixedPoint& have : scan.branches[to])
          if (scaled_dist(have.state, cont.state, cell_params[to]) < 1e-6) {
            known = true;
            break;
          }
        if (!known) scan.branches[to].push_back(std::move(cont));
      } catch (const Error&) {
        // branch genuinely ends here
      }
    }
  };
  for (std::size_t i = 1; i < grid.size(); ++i) continue_from(i - 1, i);
  for (std::size_t i = grid.size(); i-- > 1;) continue_from(i, i - 1);

  for (auto& cell : scan.branches)
    std::sort(cell.begin(), cell.end(), [](const FixedPoint& a, const FixedPoint& b) {
      if (a.state.z != b.state.z) return a.state.z < b.state.z;
      return a.state.phi < b.state.phi;
    });

  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const auto& a = scan.branches[i];
    const auto& b = scan.branches[i + 1];
    const SystemParams& pa = cell_params[i];

    if (a.size() != b.size()) {
      // pitchfork when a symmetry-invariant point flips its stability class
      bool flip = false;
      double loc = 0.5 * (grid[i] + grid[i + 1]);
      for (const FixedPoint& fa : a) {
        if (!is_symmetric_invariant(fa, pa)) continue;
        const FixedPoint* fb = nearest(b, fa.state, pa, 0.5);
        if (fb && fb->stability != fa.stability) {
          flip = true;
          const double ra = leading_real_axis_re(fa);
          const double rb = leading_real_axis_re(*fb);
          if (std::isfinite(ra) && std::isfinite(rb) &&
              ((ra < -kStabilityTol && rb > kStabilityTol) ||
               (ra > kStabilityTol && rb < -kStabilityTol)))
            loc = grid[i] + (grid[i + 1] - grid[i]) * ra / (ra - rb);
          break;
        }
      }
      scan.events.push_back({flip ? BifurcationType::pitchfork
                                  : BifurcationType::saddle_node,
                             static_cast<int>(i), static_cast<int>(i + 1), loc});
    }

    // Hopf: a complex pair on a continued branch crosses the imaginary axis
    for (const FixedPoint& fa : a) {
      const FixedPoint* fb = nearest(b, fa.state, pa, 0.5);
      if (!fb) continue;
      const double ra = leading_complex_re(fa);
      const double rb = leading_complex_re(*fb);
      if (!std::isfinite(ra) || !std::isfinite(rb)) continue;
      if ((ra < -kStabilityTol && rb > kStabilityTol) ||
          (ra > kStabilityTol && rb < -kStabilityTol)) {
        const double loc = grid[i] + (grid[i + 1] - grid[i]) * ra / (ra - rb);
        bool dup = false;
        for (const BifurcationEvent& evn : scan.events)
          if (evn.type == BifurcationType::hopf &&
              evn.lower_cell == static_cast<int>(i) &&
              std::fabs(evn.location - loc) < 1e-9 * std::max(1.0, std::fabs(loc)))
            dup = true;
        if (!dup)
          scan.events.push_back({BifurcationType::hopf, static_cast<int>(i),
                                 static_cast<int>(i + 1), loc});
      }
    }
  }

  std::sort(scan.events.begin(), scan.events.end(),
            [](const BifurcationEvent& a, const BifurcationEvent& b) {
              if (a.lower_cell != b.lower_cell) return a.lower_cell < b.lower_cell;
              return static_cast<int>(a.type) < static_cast<int>(b.type);
            });
  return scan;
}

double estimate_period(const Trajectory& traj, const SectionSpec& spec) {
  const auto crossings = section_crossings(traj, spec);
  if (crossings.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> gaps;
  gaps.reserve(crossings.size() - 1);
  for (std::size_t i = 0; i + 1 < crossings.size(); ++i)
    gaps.push_back(crossings[i + 1].time - crossings[i].time);
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  return gaps[gaps.size() / 2];
}

double convex_hull_area(std::span<const std::pair<double, double>> pts) {
  std::vector<std::pair<double, double>> p(pts.begin(), pts.end());
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  const std::size_t n = p.size();
  if (n < 3) return 0.0;

  const auto cross = [](const std::pair<double, double>& o,
                        const std::pair<double, double>& a,
                        const std::pair<double, double>& b) {
    return (a.first - o.first) * (b.second - o.second) -
           (a.second - o.second) * (b.first - o.first);
  };

  std::vector<std::pair<double, double>> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k > 0 ? k - 1 : 0);

  double area2 = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& [x0, y0] = hull[i];
    const auto& [x1, y1] = hull[(i + 1) % hull.size()];
    area2 += x0 * y1 - x1 * y0;
  }
  return 0.5 * std::fabs(area2);
}

}  // namespace mim
