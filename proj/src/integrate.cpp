#include "mim/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "mim/dopri5.hpp"

namespace mim {

namespace {

struct MeanFieldRhs {
  static constexpr int dim = 5;
  SystemParams pr;

  void operator()(double, const double* y, double* dy) const {
    const double x = y[0], p = y[1], z = y[2], phi = y[3], q = y[4];
    const double r2 = q * q - z * z;
    const double r = std::sqrt(std::max(r2, 0.0));
    const double r_reg = std::max(r, kEpsReg);
    const double sp = std::sin(phi);
    const double cp = std::cos(phi);
    dy[0] = p - 0.5 * pr.gamma * x;
    dy[1] = -x - 0.5 * pr.gamma * p - pr.lambda * pr.n0 * z;
    dy[2] = 2.0 * pr.g * r * sp - pr.kappa * z;
    dy[3] = 2.0 * pr.lambda * x - 2.0 * pr.g * z * cp / r_reg;
    dy[4] = -pr.kappa * q + 2.0 * pr.kappa * pr.n_th / pr.n0;
  }
};

// x, p plus the two complex mode amplitudes normalized by sqrt(N0):
// |u|^2 = n_a/N0, |v|^2 = n_b/N0.
struct CartesianRhs {
  static constexpr int dim = 6;
  SystemParams pr;

  void operator()(double, const double* y, double* dy) const {
    const double x = y[0], p = y[1];
    const double ur = y[2], ui = y[3], vr = y[4], vi = y[5];
    const double z = (ur * ur + ui * ui) - (vr * vr + vi * vi);
    const double lx = pr.lambda * x;
    const double hk = 0.5 * pr.kappa;
    dy[0] = p - 0.5 * pr.gamma * x;
    dy[1] = -x - 0.5 * pr.gamma * p - pr.lambda * pr.n0 * z;
    // u' = -i lx u - i g v - (kappa/2) u
    dy[2] = lx * ui + pr.g * vi - hk * ur;
    dy[3] = -lx * ur - pr.g * vr - hk * ui;
    // v' = +i lx v - i g u - (kappa/2) v
    dy[4] = -lx * vi + pr.g * ui - hk * vr;
    dy[5] = lx * vr - pr.g * ur - hk * vi;
  }
};

std::vector<double> sample_times(const IntegratorConfig& cfg) {
  std::vector<double> ts;
  const auto n = static_cast<std::size_t>(cfg.t_end / cfg.sample_dt + 1e-9);
  ts.reserve(n + 2);
  for (std::size_t k = 0; k <= n; ++k) ts.push_back(static_cast<double>(k) * cfg.sample_dt);
  if (ts.back() < cfg.t_end - 1e-12 * std::max(1.0, cfg.t_end)) ts.push_back(cfg.t_end);
  return ts;
}

StepStats collect_stats(const StepCounters& c, const std::array<double, 5>& ea,
                        double overshoot) {
  StepStats st;
  st.accepted = c.accepted;
  st.rejected = c.rejected;
  st.rhs_evals = c.rhs_evals;
  st.err_accum = ea;
  st.max_z_overshoot = overshoot;
  return st;
}

void check_initial(const SystemParams& params, const State& s0,
                   const IntegratorConfig& config) {
  params.validate();
  config.validate();
  if (!s0.finite()) throw DomainError("initial state has non-finite components");
  if (s0.q < 0.0) throw DomainError("initial q must be >= 0");
  if (std::fabs(s0.z) > s0.q) throw DomainError("initial |z| exceeds q");
}

}  // namespace

void IntegratorConfig::validate() const {
  const auto bad = [](double v) { return !std::isfinite(v); };
  if (bad(rtol) || rtol <= 0.0) throw ConfigError("config.rtol must be > 0");
  if (bad(atol) || atol <= 0.0) throw ConfigError("config.atol must be > 0");
  if (bad(h_init) || h_init <= 0.0) throw ConfigError("config.h_init must be > 0");
  if (bad(h_max) || h_max < h_init) throw ConfigError("config.h_max must be >= h_init");
  if (bad(t_end) || t_end <= 0.0) throw ConfigError("config.t_end must be > 0");
  if (bad(sample_dt) || sample_dt <= 0.0) throw ConfigError("config.sample_dt must be > 0");
}

Trajectory integrate(const SystemParams& params, const State& s0,
                     const IntegratorConfig& config) {
  check_initial(params, s0, config);

  State start = s0;
  start.phi = wrap_phase(start.phi);
  // the (z, phi) chart is singular at |z| = q; nudge exact-boundary inputs
  if (start.q > 0.0 && std::fabs(start.z) == start.q)
    start.z = std::copysign(start.q * (1.0 - 1e-9), start.z);

  Dopri5<MeanFieldRhs> stepper(
      MeanFieldRhs{params},
      StepControl{config.rtol, config.atol, config.h_init, config.h_max});
  stepper.init(0.0, start.to_array());

  const std::vector<double> ts = sample_times(config);
  Trajectory traj;
  traj.params = params;
  traj.config = config;
  traj.times.reserve(ts.size());
  traj.states.reserve(ts.size());

  double overshoot = 0.0;
  const auto store = [&](double t, const std::array<double, 5>& y) {
    State s = State::from_array(y);
    s.phi = wrap_phase(s.phi);
    if (s.q < 0.0 && s.q > -10.0 * config.atol) s.q = 0.0;
    const double excess = std::fabs(s.z) - s.q;
    if (excess > 0.0) {
      overshoot = std::max(overshoot, excess);
      s.z = std::copysign(s.q, s.z);
    }
    traj.times.push_back(t);
    traj.states.push_back(s);
  };

  store(0.0, stepper.y());
  std::size_t next = 1;
  while (next < ts.size()) {
    const StepStatus st = stepper.advance(config.t_end);
    if (st == StepStatus::underflow || st == StepStatus::nonfinite) {
      traj.step_stats = collect_stats(stepper.counters(), stepper.err_accum(), overshoot);
      if (st == StepStatus::underflow)
        throw IntegrationError(IntegrationError::Kind::stepsize_underflow,
                               "step size underflow (stiffness) at t = " +
                                   std::to_string(stepper.t()),
                               std::move(traj));
      throw IntegrationError(IntegrationError::Kind::divergence,
                             "solution diverged near t = " + std::to_string(stepper.t()),
                             std::move(traj));
    }
    std::array<double, 5> yi;
    while (next < ts.size() && ts[next] <= stepper.t()) {
      stepper.dense_eval(ts[next], yi);
      store(ts[next], yi);
      ++next;
    }
    if (st == StepStatus::reached_target) break;
  }
  traj.step_stats = collect_stats(stepper.counters(), stepper.err_accum(), overshoot);
  return traj;
}

Trajectory integrate_cartesian_oracle(const SystemParams& params, const State& s0,
                                      const IntegratorConfig& config) {
  check_initial(params, s0, config);
  if (params.n_th != 0.0)
    throw ConfigError("cartesian oracle requires n_th = 0");

  const double na = 0.5 * (s0.q + s0.z);
  const double nb = 0.5 * (s0.q - s0.z);
  const double phi0 = wrap_phase(s0.phi);
  std::array<double, 6> y0{s0.x,
                           s0.p,
                           std::sqrt(std::max(na, 0.0)),
                           0.0,
                           std::sqrt(std::max(nb, 0.0)) * std::cos(phi0),
                           std::sqrt(std::max(nb, 0.0)) * std::sin(phi0)};

  Dopri5<CartesianRhs> stepper(
      CartesianRhs{params},
      StepControl{config.rtol, config.atol, config.h_init, config.h_max});
  stepper.init(0.0, y0);

  const std::vector<double> ts = sample_times(config);
  Trajectory traj;
  traj.params = params;
  traj.config = config;
  traj.times.reserve(ts.size());
  traj.states.reserve(ts.size());

  const auto store = [&](double t, const std::array<double, 6>& y) {
    const std::complex<double> u{y[2], y[3]}, v{y[4], y[5]};
    const double nu = std::norm(u), nv = std::norm(v);
    State s;
    s.x = y[0];
    s.p = y[1];
    s.z = nu - nv;
    s.q = nu + nv;
    const std::complex<double> j = std::conj(u) * v;
    s.phi = (std::abs(j) > 0.0) ? std::arg(j) : 0.0;
    s.phi = wrap_phase(s.phi);
    traj.times.push_back(t);
    traj.states.push_back(s);
  };

  store(0.0, stepper.y());
  std::size_t next = 1;
  while (next < ts.size()) {
    const StepStatus st = stepper.advance(config.t_end);
    if (st == StepStatus::underflow || st == StepStatus::nonfinite) {
      std::array<double, 5> ea{};  // 6-dim error accumulator not state-mapped
      traj.step_stats = collect_stats(stepper.counters(), ea, 0.0);
      throw IntegrationError(st == StepStatus::underflow
                                 ? IntegrationError::Kind::stepsize_underflow
                                 : IntegrationError::Kind::divergence,
                             "oracle integration failed near t = " +
                                 std::to_string(stepper.t()),
                             std::move(traj));
    }
    std::array<double, 6> yi;
    while (next < ts.size() && ts[next] <= stepper.t()) {
      stepper.dense_eval(ts[next], yi);
      store(ts[next], yi);
      ++next;
    }
    if (st == StepStatus::reached_target) break;
  }
  std::array<double, 5> ea{};
  traj.step_stats = collect_stats(stepper.counters(), ea, 0.0);
  return traj;
}

namespace {

double coord_of(const State& s, SectionCoord c) {
  switch (c) {
    case SectionCoord::x: return s.x;
    case SectionCoord::p: return s.p;
    case SectionCoord::z: return s.z;
    case SectionCoord::phi: return s.phi;
    case SectionCoord::q: return s.q;
  }
  return 0.0;
}

double deriv_of(const StateDerivative& d, SectionCoord c) {
  switch (c) {
    case SectionCoord::x: return d.dx;
    case SectionCoord::p: return d.dp;
    case SectionCoord::z: return d.dz;
    case SectionCoord::phi: return d.dphi;
    case SectionCoord::q: return d.dq;
  }
  return 0.0;
}

// Cubic Hermite value and slope on [0, 1] given endpoint values and
// endpoint slopes scaled by the interval length.
double hermite(double th, double y0, double y1, double m0, double m1) {
  const double t2 = th * th, t3 = t2 * th;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + th) * m0 +
         (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
}

double hermite_slope(double th, double y0, double y1, double m0, double m1) {
  const double t2 = th * th;
  return (6 * t2 - 6 * th) * y0 + (3 * t2 - 4 * th + 1) * m0 +
         (-6 * t2 + 6 * th) * y1 + (3 * t2 - 2 * th) * m1;
}

}  // namespace

std::vector<SectionCrossing> section_crossings(const Trajectory& traj,
                                               const SectionSpec& spec) {
  if (!std::isfinite(spec.level)) throw DomainError("section level must be finite");
  std::vector<SectionCrossing> out;
  if (traj.size() < 2) return out;

  constexpr double slope_tol = 1e-9;  // transversality threshold

  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const State& s0 = traj.states[k];
    const State& s1 = traj.states[k + 1];
    const double t0 = traj.times[k], t1 = traj.times[k + 1];
    const double dt = t1 - t0;

    // phi lives on a circle; skip intervals that straddle the branch seam
    // when sectioning on phi itself.
    const double dphi_raw = s1.phi - s0.phi;
    if (spec.coordinate == SectionCoord::phi && std::fabs(dphi_raw) > kPi) continue;

    const StateDerivative d0 = derivatives(s0, traj.params);
    const StateDerivative d1 = derivatives(s1, traj.params);

    double c0 = coord_of(s0, spec.coordinate);
    double c1 = coord_of(s1, spec.coordinate);
    const double r0 = c0 - spec.level;
    const double r1 = c1 - spec.level;
    if (!(r0 * r1 < 0.0)) continue;  // strict sign change only

    const double m0 = deriv_of(d0, spec.coordinate) * dt;
    const double m1 = deriv_of(d1, spec.coordinate) * dt;

    // bisection on the Hermite cubic
    double lo = 0.0, hi = 1.0;
    double flo = r0;
    for (int it = 0; it < 90; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = hermite(mid, c0, c1, m0, m1) - spec.level;
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    const double th = 0.5 * (lo + hi);
    const double slope = hermite_slope(th, c0, c1, m0, m1) / dt;
    if (std::fabs(slope) <= slope_tol) continue;  // grazing contact
    if (spec.direction == SectionDirection::rising && slope <= 0.0) continue;
    if (spec.direction == SectionDirection::falling && slope >= 0.0) continue;

    // interpolate the full state; phi through its local (unwrapped) branch
    const double phi1_adj = s0.phi + wrap_phase(dphi_raw);
    State sc;
    sc.x = hermite(th, s0.x, s1.x, d0.dx * dt, d1.dx * dt);
    sc.p = hermite(th, s0.p, s1.p, d0.dp * dt, d1.dp * dt);
    sc.z = hermite(th, s0.z, s1.z, d0.dz * dt, d1.dz * dt);
    sc.phi = wrap_phase(hermite(th, s0.phi, phi1_adj, d0.dphi * dt, d1.dphi * dt));
    sc.q = hermite(th, s0.q, s1.q, d0.dq * dt, d1.dq * dt);
    if (std::fabs(sc.z) > sc.q) sc.z = std::copysign(sc.q, sc.z);
    out.push_back({t0 + th * dt, sc});
  }
  return out;
}

}  // namespace mim
