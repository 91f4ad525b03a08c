#pragma once

// Embedded Dormand-Prince 5(4) pair with Lund-stabilized step control and
// the classic quartic dense-output interpolant. The driver advances one
// accepted step at a time so callers can sample, locate events, or
// renormalize tangent vectors between steps.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace mim {

struct StepControl {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_init = 1e-3;
  double h_max = 0.1;
};

enum class StepStatus {
  ok,              // one step accepted, target not yet reached
  reached_target,  // one step accepted, now exactly at t_stop
  underflow,       // required step fell below the 1e-14 floor
  nonfinite,       // the field or the solution stopped being finite
};

struct StepCounters {
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t rhs_evals = 0;
};

namespace dopri5_detail {
inline constexpr double a21 = 0.2;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                        a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                        a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
inline constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                        e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0,
                        d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0,
                        d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0,
                        d7 = 69997945.0 / 29380423.0;
inline constexpr double safe = 0.9, facl = 0.2, facr = 10.0, beta = 0.04;
inline constexpr double h_floor = 1e-14;
}  // namespace dopri5_detail

/// Rhs must provide `static constexpr int dim` and
/// `void operator()(double t, const double* y, double* dydt) const`.
template <class Rhs>
class Dopri5 {
 public:
  static constexpr int N = Rhs::dim;
  using Vec = std::array<double, N>;

  Dopri5(Rhs rhs, StepControl ctl) : rhs_(rhs), ctl_(ctl) {}

  void init(double t0, const Vec& y0) {
    t_ = t_prev_ = t0;
    y_ = y_prev_ = y0;
    h_ = std::min(ctl_.h_init, ctl_.h_max);
    have_k1_ = false;
    facold_ = 1e-4;
  }

  /// Performs one accepted step with h clamped so the step never passes
  /// t_stop. After return, the interval [t_prev(), t()] carries a dense
  /// interpolant.
  StepStatus advance(double t_stop) {
    using namespace dopri5_detail;
    if (!have_k1_) {
      rhs_(t_, y_.data(), k1_.data());
      ++counters_.rhs_evals;
      if (!finite(k1_)) return StepStatus::nonfinite;
      have_k1_ = true;
    }

    while (true) {
      double h = std::min(h_, ctl_.h_max);
      bool last = false;
      if (t_ + 1.01 * h >= t_stop) {
        h = t_stop - t_;
        last = true;
      }
      if (h < h_floor) return StepStatus::underflow;

      Vec yt, k2, k3, k4, k5, k6, k7;
      for (int i = 0; i < N; ++i) yt[i] = y_[i] + h * a21 * k1_[i];
      rhs_(t_ + c2 * h, yt.data(), k2.data());
      for (int i = 0; i < N; ++i) yt[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
      rhs_(t_ + c3 * h, yt.data(), k3.data());
      for (int i = 0; i < N; ++i)
        yt[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
      rhs_(t_ + c4 * h, yt.data(), k4.data());
      for (int i = 0; i < N; ++i)
        yt[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      rhs_(t_ + c5 * h, yt.data(), k5.data());
      for (int i = 0; i < N; ++i)
        yt[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] +
                             a64 * k4[i] + a65 * k5[i]);
      rhs_(t_ + h, yt.data(), k6.data());
      Vec ynew;
      for (int i = 0; i < N; ++i)
        ynew[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3[i] + a74 * k4[i] +
                               a75 * k5[i] + a76 * k6[i]);
      rhs_(t_ + h, ynew.data(), k7.data());
      counters_.rhs_evals += 6;

      if (!finite(k2) || !finite(k3) || !finite(k4) || !finite(k5) ||
          !finite(k6) || !finite(k7) || !finite(ynew))
        return StepStatus::nonfinite;

      // mixed absolute/relative error norm
      Vec ee;
      double err = 0.0;
      for (int i = 0; i < N; ++i) {
        ee[i] = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                     e6 * k6[i] + e7 * k7[i]);
        const double sc =
            ctl_.atol + ctl_.rtol * std::max(std::fabs(y_[i]), std::fabs(ynew[i]));
        const double w = ee[i] / sc;
        err += w * w;
      }
      err = std::sqrt(err / N);
      if (!std::isfinite(err)) return StepStatus::nonfinite;

      const double fac11 = std::pow(err, 0.2 - beta * 0.75);
      double fac = fac11 / std::pow(facold_, beta);
      fac = std::max(1.0 / facr, std::min(1.0 / facl, fac / safe));
      double h_new = h / fac;

      if (err > 1.0) {
        h_ = h / std::min(1.0 / facl, fac11 / safe);
        ++counters_.rejected;
        continue;
      }

      // accepted: build dense coefficients for [t_, t_ + h]
      facold_ = std::max(err, 1e-4);
      for (int i = 0; i < N; ++i) {
        const double dy = ynew[i] - y_[i];
        const double bspl = h * k1_[i] - dy;
        rc1_[i] = y_[i];
        rc2_[i] = dy;
        rc3_[i] = bspl;
        rc4_[i] = dy - h * k7[i] - bspl;
        rc5_[i] = h * (d1 * k1_[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                       d6 * k6[i] + d7 * k7[i]);
        err_accum_[i] += std::fabs(ee[i]);
      }
      t_prev_ = t_;
      y_prev_ = y_;
      t_ = last ? t_stop : t_ + h;
      y_ = ynew;
      k1_ = k7;  // FSAL
      h_ = std::min(h_new, ctl_.h_max);
      ++counters_.accepted;
      return last ? StepStatus::reached_target : StepStatus::ok;
    }
  }

  /// Interpolates inside the last accepted step [t_prev(), t()].
  void dense_eval(double tq, Vec& out) const {
    const double dt = t_ - t_prev_;
    const double th = dt > 0.0 ? (tq - t_prev_) / dt : 0.0;
    const double th1 = 1.0 - th;
    for (int i = 0; i < N; ++i)
      out[i] = rc1_[i] +
               th * (rc2_[i] + th1 * (rc3_[i] + th * (rc4_[i] + th1 * rc5_[i])));
  }

  double t() const { return t_; }
  double t_prev() const { return t_prev_; }
  const Vec& y() const { return y_; }

  /// Replaces the current solution (e.g. tangent renormalization) and
  /// invalidates the FSAL cache.
  void set_y(const Vec& y) {
    y_ = y;
    have_k1_ = false;
  }

  const StepCounters& counters() const { return counters_; }
  const Vec& err_accum() const { return err_accum_; }

 private:
  static bool finite(const Vec& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }

  Rhs rhs_;
  StepControl ctl_;
  double t_ = 0.0, t_prev_ = 0.0, h_ = 0.0;
  Vec y_{}, y_prev_{}, k1_{};
  Vec rc1_{}, rc2_{}, rc3_{}, rc4_{}, rc5_{};
  Vec err_accum_{};
  bool have_k1_ = false;
  double facold_ = 1e-4;
  StepCounters counters_;
};

}  // namespace mim
