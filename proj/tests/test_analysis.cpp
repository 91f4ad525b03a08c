#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "mim/analysis.hpp"
#include "mim/integrate.hpp"
#include "mim/io.hpp"

using namespace mim;

namespace {

SystemParams fig3_params(double kappa = 0.0, double gamma = 0.0, double n_th = 0.0) {
  SystemParams p;
  p.g = 0.2;
  p.lambda = 0.1;
  p.n0 = 1000.0;
  p.kappa = kappa;
  p.gamma = gamma;
  p.n_th = n_th;
  return p;
}

const State kFig3Initial{0.0, 0.0, 0.95, 0.0, 1.0};

// supercritical thermal case: D = 1/2, C-tilde set via lambda
SystemParams thermal_params(double c_tilde) {
  SystemParams p;
  p.g = 0.2;
  p.gamma = 0.01;
  p.n0 = 1000.0;
  p.n_th = 100.0;
  p.kappa = 0.2;
  p.lambda = std::sqrt(p.g * (1.0 + 0.25 * p.gamma * p.gamma) / (2.0 * p.n_th * c_tilde));
  return p;
}

const FixedPoint* find_family(const std::vector<FixedPoint>& fps, FixedPointFamily fam,
                              double z_sign = 0.0) {
  for (const FixedPoint& fp : fps) {
    if (fp.family != fam) continue;
    if (z_sign != 0.0 && fp.state.z * z_sign <= 0.0) continue;
    return &fp;
  }
  return nullptr;
}

bool not_stable(Stability s) { return s == Stability::unstable || s == Stability::saddle; }

}  // namespace

TEST_CASE("closed-form fixed points, lossless C = 0.02") {
  const SystemParams p = fig3_params();
  const auto fps = fixed_points_closed_form(p);
  REQUIRE(fps.size() == 4);

  const double zs = std::sqrt(1.0 - 0.02 * 0.02);
  for (const double sign : {1.0, -1.0}) {
    const FixedPoint* fp = find_family(fps, FixedPointFamily::broken_pair, sign);
    REQUIRE(fp != nullptr);
    CHECK(fp->state.z == doctest::Approx(sign * zs).epsilon(1e-10));
    CHECK(fp->state.x == doctest::Approx(-100.0 * sign * zs).epsilon(1e-10));
    CHECK(fp->state.p == 0.0);
    CHECK(fp->state.phi == doctest::Approx(kPi));
    CHECK(fp->state.q == 1.0);
    CHECK(fp->stability == Stability::center);  // conservative case
  }
  for (const FixedPoint& fp : fps) CHECK(fp.residual_inf < 1e-10);

  // the pair is exactly S-conjugate
  const FixedPoint* plus = find_family(fps, FixedPointFamily::broken_pair, 1.0);
  const FixedPoint* minus = find_family(fps, FixedPointFamily::broken_pair, -1.0);
  const State mirrored = apply_symmetry(plus->state);
  CHECK(mirrored.x == doctest::Approx(minus->state.x).epsilon(1e-12));
  CHECK(mirrored.z == doctest::Approx(minus->state.z).epsilon(1e-12));

  // symmetric points lose stability below the pitchfork
  CHECK(not_stable(find_family(fps, FixedPointFamily::symmetric_pi)->stability));
}

TEST_CASE("closed-form fixed points, Josephson side C = 2") {
  SystemParams p = fig3_params();
  p.lambda = 0.01;
  const auto fps = fixed_points_closed_form(p);
  REQUIRE(fps.size() == 2);
  const FixedPoint* pi_point = find_family(fps, FixedPointFamily::symmetric_pi);
  REQUIRE(pi_point != nullptr);
  CHECK(pi_point->stability == Stability::center);
  // center test: all real parts tiny, at least two imaginary pairs
  int imag_pairs = 0;
  for (const auto& ev : pi_point->eigenvalues) {
    CHECK(std::fabs(ev.real()) < 1e-9);
    if (ev.imag() > 1e-6) ++imag_pairs;
  }
  CHECK(imag_pairs >= 2);
}

TEST_CASE("membrane damping shifts the threshold and stabilizes the pair") {
  const SystemParams p = fig3_params(0.0, 0.01);  // C (1 + gamma^2/4) < 1
  const auto fps = fixed_points_closed_form(p);
  REQUIRE(fps.size() == 4);
  const FixedPoint* fp = find_family(fps, FixedPointFamily::broken_pair, 1.0);
  REQUIRE(fp != nullptr);
  CHECK(fp->stability == Stability::stable);
  const double cg = 0.02 * (1.0 + 0.25 * 0.01 * 0.01);
  CHECK(fp->state.z == doctest::Approx(std::sqrt(1.0 - cg * cg)).epsilon(1e-10));
  CHECK(not_stable(find_family(fps, FixedPointFamily::symmetric_pi)->stability));
}

TEST_CASE("photon loss at zero temperature leaves only the vacuum") {
  const auto fps = fixed_points_closed_form(fig3_params(0.02, 0.01));
  REQUIRE(fps.size() == 1);
  CHECK(fps[0].family == FixedPointFamily::vacuum);
  CHECK(fps[0].state.q == 0.0);
  CHECK(fps[0].state.x == 0.0);
  CHECK(fps[0].stability == Stability::stable);
  CHECK(fps[0].residual_inf < 1e-10);
}

TEST_CASE("thermal bath: q = q0 leaf") {
  SUBCASE("far below threshold only the symmetric points survive") {
    const auto fps = fixed_points_closed_form(fig3_params(0.02, 0.01, 200.0));
    REQUIRE(fps.size() == 2);
    for (const FixedPoint& fp : fps) {
      CHECK(fp.state.q == doctest::Approx(0.4).epsilon(1e-12));
      CHECK(fp.state.z == 0.0);
      CHECK(not_stable(fp.stability));  // chaos persists far from the critical points
    }
  }

  SUBCASE("supercritical window carries inner stable and outer unstable pairs") {
    const SystemParams p = thermal_params(0.9);
    const ControlParams cp = control_params(p);
    REQUIRE(cp.c_tilde.has_value());
    CHECK(*cp.c_tilde == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(cp.d == doctest::Approx(0.5).epsilon(1e-12));

    const auto fps = fixed_points_closed_form(p);
    REQUIRE(fps.size() == 6);

    // independent root check of w^2 - Ct^2 (1+D^2) w + D^2 Ct^2 = 0
    const double b = 0.81 * 1.25, c = 0.25 * 0.81;
    const double sq = std::sqrt(b * b - 4.0 * c);
    const double w_in = 0.5 * (b + sq), w_out = 0.5 * (b - sq);
    const double q0 = 0.2;
    const double z_in = q0 * std::sqrt(1.0 - w_in);
    const double z_out = q0 * std::sqrt(1.0 - w_out);

    int stable_inner = 0, unstable_outer = 0;
    for (const FixedPoint& fp : fps) {
      CHECK(fp.residual_inf < 1e-10);
      if (fp.family != FixedPointFamily::thermal) continue;
      CHECK(fp.state.q == doctest::Approx(q0).epsilon(1e-10));
      const double az = std::fabs(fp.state.z);
      if (std::fabs(az - z_in) < 1e-9) {
        CHECK(fp.stability == Stability::stable);
        ++stable_inner;
      } else {
        CHECK(az == doctest::Approx(z_out).epsilon(1e-9));
        CHECK(not_stable(fp.stability));
        ++unstable_outer;
      }
    }
    CHECK(stable_inner == 2);
    CHECK(unstable_outer == 2);

    // thermal broken points come in S-conjugate pairs
    for (const FixedPoint& fp : fps) {
      if (fp.family != FixedPointFamily::thermal) continue;
      const State m = apply_symmetry(fp.state);
      bool found = false;
      for (const FixedPoint& other : fps)
        if (std::fabs(other.state.z - m.z) < 1e-9 &&
            std::fabs(wrap_phase(other.state.phi - m.phi)) < 1e-9)
          found = true;
      CHECK(found);
    }
  }
}

TEST_CASE("Newton refinement") {
  const SystemParams p = fig3_params();

  SUBCASE("recovers the broken pair from a 1e-3 perturbation") {
    const double zs = std::sqrt(1.0 - 0.0004);
    const State guess{-100.0 * zs + 1e-3, 1e-3, zs - 1e-3, kPi + 1e-3, 1.0};
    const FixedPoint fp = refine_fixed_point(guess, p);
    CHECK(std::fabs(fp.state.z - zs) < 1e-10);
    CHECK(std::fabs(fp.state.x + 100.0 * zs) < 1e-8);
    CHECK(std::fabs(fp.state.p) < 1e-10);
    CHECK(fp.residual_inf < 1e-10);
  }

  SUBCASE("q is frozen in the conservative case: the perturbed leaf keeps its root") {
    const double zs = std::sqrt(1.0 - 0.0004);
    State guess{-100.0 * zs, 0.0, zs, kPi, 1.001};
    const FixedPoint fp = refine_fixed_point(guess, p);
    CHECK(fp.state.q == doctest::Approx(1.001));
    // on the q = q0 leaf the branch sits at z = sqrt(q0^2 - C^2)
    CHECK(fp.state.z == doctest::Approx(std::sqrt(1.001 * 1.001 - 0.0004)).epsilon(1e-10));
  }

  SUBCASE("an exact root converges without iterating") {
    const FixedPoint fp = refine_fixed_point(State{0, 0, 0, kPi, 1}, p);
    CHECK(fp.refine_iterations <= 1);
    CHECK(fp.residual_inf < 1e-12);
  }

  SUBCASE("a guess far outside any basin raises, never fabricates a root") {
    SystemParams p2 = p;
    p2.lambda = 0.01;
    CHECK_THROWS_AS(refine_fixed_point(State{5, 3, 0.999, 2.0, 1.0}, p2), ConvergenceError);
    try {
      refine_fixed_point(State{5, 3, 0.9999, 2.0, 1.0}, p2);
    } catch (const ConvergenceError& e) {
      CHECK(e.residual > 1e-10);
      CHECK(e.last_iterate.finite());
    }
  }

  SUBCASE("the chart boundary is rejected up front") {
    CHECK_THROWS_AS(refine_fixed_point(State{0, 0, 1.0, 0.0, 1.0}, p), DomainError);
  }
}

TEST_CASE("analytic and finite-difference Jacobians agree on eigenvalues") {
  for (const SystemParams& p : {thermal_params(0.9), fig3_params(0.0, 0.01)}) {
    const auto fps = fixed_points_closed_form(p);
    for (const FixedPoint& fp : fps) {
      const Matrix5 ja = jacobian(fp.state, p);
      Matrix5 jfd;
      const double h = 1e-6;
      for (int col = 0; col < 5; ++col) {
        auto plus = fp.state.to_array(), minus = fp.state.to_array();
        plus[col] += h;
        minus[col] -= h;
        const auto dp = derivatives(State::from_array(plus), p).to_array();
        const auto dm = derivatives(State::from_array(minus), p).to_array();
        for (int row = 0; row < 5; ++row) jfd(row, col) = (dp[row] - dm[row]) / (2.0 * h);
      }
      Eigen::EigenSolver<Matrix5> ea(ja), eb(jfd);
      std::vector<std::complex<double>> va, vb;
      for (int i = 0; i < 5; ++i) {
        va.push_back(ea.eigenvalues()(i));
        vb.push_back(eb.eigenvalues()(i));
      }
      // greedy nearest matching
      for (const auto& ev : va) {
        double best = 1e300;
        std::size_t arg = 0;
        for (std::size_t j = 0; j < vb.size(); ++j)
          if (std::abs(vb[j] - ev) < best) {
            best = std::abs(vb[j] - ev);
            arg = j;
          }
        CHECK(best <= 1e-5 * std::max(1.0, std::abs(ev)));
        vb.erase(vb.begin() + static_cast<long>(arg));
      }
    }
  }
}

TEST_CASE("Lyapunov spectrum sums to the phase-space divergence") {
  SUBCASE("conservative case sums to zero") {
    const auto r = lyapunov_spectrum(fig3_params(), kFig3Initial, 3000.0, 1.0, 100.0);
    CHECK(std::fabs(r.sum()) < 0.002);
    CHECK(r.exponents[0] > 0.005);  // chaotic
  }
  SUBCASE("membrane damping sums to -gamma") {
    const auto r = lyapunov_spectrum(fig3_params(0.0, 0.01), kFig3Initial, 3000.0, 1.0, 100.0);
    CHECK(r.sum() == doctest::Approx(-0.01).epsilon(0.02).scale(0));
  }
  SUBCASE("linear dynamics have no positive exponent") {
    SystemParams p = fig3_params();
    p.lambda = 0.0;
    const auto r = lyapunov_spectrum(p, State{0, 0, 0.6, 1.0, 1.0}, 2000.0, 1.0, 50.0);
    CHECK(r.exponents[0] < 1e-3);
  }
}

TEST_CASE("Lyapunov estimates are reproducible across renormalization intervals") {
  const SystemParams p = fig3_params();
  std::vector<double> vals;
  for (const double dt : {0.5, 1.0, 2.0})
    vals.push_back(lyapunov_spectrum(p, kFig3Initial, 4000.0, dt, 100.0).exponents[0]);
  for (const double v : vals) {
    CHECK(v == doctest::Approx(vals[0]).epsilon(0.10));
    CHECK(v > 0.005);
  }
}

TEST_CASE("Benettin two-trajectory estimate") {
  SUBCASE("agrees with the tangent-space exponent on the chaotic case") {
    const SystemParams p = fig3_params();
    const double spec = lyapunov_spectrum(p, kFig3Initial, 4000.0, 1.0, 100.0).exponents[0];
    const double ben = max_lyapunov_two_trajectory(p, kFig3Initial, 4000.0, 1e-8);
    CHECK(ben == doctest::Approx(spec).epsilon(0.20));
    CHECK(ben > 0.005);
  }
  SUBCASE("vanishes at a center fixed point") {
    SystemParams p = fig3_params();
    p.lambda = 0.01;
    CHECK(std::fabs(max_lyapunov_two_trajectory(p, State{0, 0, 0, kPi, 1}, 6000.0)) < 1e-3);
  }
  SUBCASE("vanishes for the linear system") {
    SystemParams p = fig3_params();
    p.lambda = 0.0;
    CHECK(std::fabs(max_lyapunov_two_trajectory(p, State{0, 0, 0.6, 1.0, 1}, 2000.0)) < 1e-3);
  }
  SUBCASE("separation must be small but representable") {
    CHECK_THROWS_AS(max_lyapunov_two_trajectory(fig3_params(), kFig3Initial, 100.0, 1e-3),
                    ConfigError);
  }
}

TEST_CASE("regime classification") {
  IntegratorConfig cfg;

  SUBCASE("lambda = 0 is rabi") {
    SystemParams p = fig3_params();
    p.lambda = 0.0;
    cfg.t_end = 160.0;
    const auto lab = classify_regime(integrate(p, State{0, 0, 0.6, 1.2, 1}, cfg), p);
    CHECK(lab.label == Regime::rabi);
    CHECK(!lab.evidence.short_window);
  }
  SUBCASE("conservative reference run is chaotic") {
    const SystemParams p = fig3_params();
    cfg.t_end = 200.0;
    const auto lab = classify_regime(integrate(p, kFig3Initial, cfg), p);
    CHECK(lab.label == Regime::chaotic);
    CHECK(lab.evidence.lyapunov_max > 0.005);
    CHECK(lab.evidence.z_sign_changes >= 2);
  }
  SUBCASE("photon loss run decays") {
    const SystemParams p = fig3_params(0.02, 0.01);
    cfg.t_end = 400.0;
    const auto lab = classify_regime(integrate(p, kFig3Initial, cfg), p);
    CHECK(lab.label == Regime::decayed);
    CHECK(lab.evidence.q_final == doctest::Approx(std::exp(-8.0)).epsilon(1e-4));
  }
  SUBCASE("membrane damping self-traps on long horizons") {
    const SystemParams p = fig3_params(0.0, 0.01);
    cfg.t_end = 2000.0;
    cfg.sample_dt = 0.05;
    const Trajectory traj = integrate(p, kFig3Initial, cfg);
    const auto lab = classify_regime(traj, p);
    CHECK(lab.label == Regime::self_trapped);
    CHECK(lab.evidence.z_mean_abs_late > 0.1);

    // label is invariant under the symmetry applied to the trajectory
    Trajectory mirrored = traj;
    for (State& s : mirrored.states) s = apply_symmetry(s);
    CHECK(classify_regime(mirrored, p).label == lab.label);
  }
  SUBCASE("short windows are flagged") {
    const SystemParams p = fig3_params();
    cfg.t_end = 10.0;
    const auto lab = classify_regime(integrate(p, kFig3Initial, cfg), p);
    CHECK(lab.evidence.short_window);
  }
}

TEST_CASE("bifurcation scan locates the pitchfork") {
  const std::vector<double> grid{19.9990, 19.9997, 20.0004, 20.0011};

  SUBCASE("lossless threshold at n0 = g / lambda^2 = 20") {
    const auto scan = bifurcation_scan(fig3_params(), "n0", grid);
    REQUIRE(scan.events.size() == 1);
    const auto& e = scan.events[0];
    CHECK(e.type == BifurcationType::pitchfork);
    CHECK(grid[static_cast<std::size_t>(e.lower_cell)] <= 20.0);
    CHECK(grid[static_cast<std::size_t>(e.upper_cell)] >= 20.0);
    CHECK(scan.branches[0].size() == 2);
    CHECK(scan.branches[3].size() == 4);
  }

  SUBCASE("damping shifts the threshold to C (1 + gamma^2/4) = 1") {
    const auto scan = bifurcation_scan(fig3_params(0.0, 0.01), "n0", grid);
    REQUIRE(scan.events.size() == 1);
    const auto& e = scan.events[0];
    const double shifted = 20.0 * (1.0 + 0.25 * 0.01 * 0.01);
    CHECK(e.type == BifurcationType::pitchfork);
    CHECK(grid[static_cast<std::size_t>(e.lower_cell)] <= shifted);
    CHECK(grid[static_cast<std::size_t>(e.upper_cell)] >= shifted);
    // the lossless threshold lies in a different cell: the shift is resolved
    CHECK(grid[static_cast<std::size_t>(e.lower_cell)] > 20.0);
  }
}

TEST_CASE("thermal scan: supercritical pitchfork plus saddle-node pair") {
  const SystemParams base = thermal_params(1.0);
  std::vector<double> lgrid;
  for (const double ct : {1.2, 1.05, 0.95, 0.85, 0.75})
    lgrid.push_back(std::sqrt(base.g * (1.0 + 0.25 * base.gamma * base.gamma) /
                              (2.0 * base.n_th * ct)));
  const auto scan = bifurcation_scan(base, "lambda", lgrid);

  REQUIRE(scan.events.size() == 2);
  const auto ct_of = [&](double lambda) {
    SystemParams p = base;
    p.lambda = lambda;
    return *control_params(p).c_tilde;
  };

  const auto& pf = scan.events[0];
  CHECK(pf.type == BifurcationType::pitchfork);
  CHECK(ct_of(lgrid[static_cast<std::size_t>(pf.lower_cell)]) >= 1.0);
  CHECK(ct_of(lgrid[static_cast<std::size_t>(pf.upper_cell)]) <= 1.0);

  const auto& sn = scan.events[1];
  CHECK(sn.type == BifurcationType::saddle_node);
  const double ct_sn = 2.0 * 0.5 / (1.0 + 0.25);  // 2D/(1+D^2) = 0.8
  CHECK(ct_of(lgrid[static_cast<std::size_t>(sn.lower_cell)]) >= ct_sn);
  CHECK(ct_of(lgrid[static_cast<std::size_t>(sn.upper_cell)]) <= ct_sn);

  // counts: 4 (outer only) -> 6 (inner born) -> 2 (all annihilate)
  CHECK(scan.branches[0].size() == 4);
  CHECK(scan.branches[2].size() == 6);
  CHECK(scan.branches[4].size() == 2);
}

TEST_CASE("Hopf bifurcation on the phi = 0 thermal branch") {
  // the (x,p,z,phi) block at (0,0,0,0,q0) has characteristic polynomial
  //   ((s + gamma/2)^2 + 1)(s^2 + kappa s + 4 g^2) + 8 g lambda^2 N_th = 0;
  // an imaginary pair s = i*omega exists when
  //   omega^2 = (kappa (1 + gamma^2/4) + 2 gamma g^2) / (kappa + gamma)
  //   8 g lambda^2 N_th = 2 (gamma/2) kappa omega^2
  //                       - (gamma^2/4 + 1 - omega^2)(4 g^2 - omega^2)
  const SystemParams base = fig3_params(0.02, 0.01, 10.0);
  const double a = 0.5 * base.gamma;
  const double om2 = (base.kappa * (1.0 + a * a) + 8.0 * a * base.g * base.g) /
                     (base.kappa + 2.0 * a);
  const double nth_star =
      (2.0 * a * base.kappa * om2 - (a * a + 1.0 - om2) * (4.0 * base.g * base.g - om2)) /
      (8.0 * base.g * base.lambda * base.lambda);
  REQUIRE(nth_star == doctest::Approx(9.8096).epsilon(1e-4));

  const std::vector<double> grid{9.6, 9.75, 9.9, 10.05, 10.2};
  const auto scan = bifurcation_scan(base, "n_th", grid);

  bool hopf_found = false;
  for (const auto& e : scan.events) {
    if (e.type != BifurcationType::hopf) continue;
    hopf_found = true;
    CHECK(grid[static_cast<std::size_t>(e.lower_cell)] <= nth_star);
    CHECK(grid[static_cast<std::size_t>(e.upper_cell)] >= nth_star);
    CHECK(e.location == doctest::Approx(nth_star).epsilon(0.01));
  }
  CHECK(hopf_found);

  // the symmetric-pi pitchfork at q0 = C (1+gamma^2/4), N_th = 10.00025,
  // lands in the next cell
  bool pf_found = false;
  for (const auto& e : scan.events)
    if (e.type == BifurcationType::pitchfork) {
      pf_found = true;
      CHECK(grid[static_cast<std::size_t>(e.lower_cell)] <= 10.00025);
      CHECK(grid[static_cast<std::size_t>(e.upper_cell)] >= 10.00025);
    }
  CHECK(pf_found);
}

TEST_CASE("scan input validation and per-cell error capture") {
  CHECK_THROWS_AS(bifurcation_scan(fig3_params(), "n0", {1.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(bifurcation_scan(fig3_params(), "n0", {1.0, 3.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(bifurcation_scan(fig3_params(), "bogus", {1.0, 2.0, 3.0}), ConfigError);

  // an invalid cell (n0 < 1) is recorded, the scan continues
  const auto scan = bifurcation_scan(fig3_params(), "n0", {0.5, 19.0, 21.0});
  CHECK(!scan.cell_errors[0].empty());
  CHECK(scan.branches[0].empty());
  CHECK(!scan.branches[1].empty());
}

TEST_CASE("period estimation on the linear oscillation") {
  SystemParams p = fig3_params();
  p.lambda = 0.0;
  IntegratorConfig cfg;
  cfg.t_end = 160.0;
  const Trajectory traj = integrate(p, State{0, 0, 0.6, 1.0, 1}, cfg);
  const double period = estimate_period(traj, {SectionCoord::z, 0.0, SectionDirection::rising});
  CHECK(period == doctest::Approx(kPi / p.g).epsilon(1e-3));
  const Trajectory flat = integrate(p, State{0, 0, 0, 0, 1}, cfg);
  CHECK(std::isnan(estimate_period(flat, {SectionCoord::z, 0.5, SectionDirection::both})));
}

TEST_CASE("scan and spectrum JSON exports") {
  const std::vector<double> grid{19.9990, 19.9997, 20.0004, 20.0011};
  const auto scan = bifurcation_scan(fig3_params(), "n0", grid);
  const Json j = Json::parse(to_json(scan).dump());
  CHECK(j.at("control") == "n0");
  CHECK(j.at("grid").size() == 4);
  CHECK(j.at("branches").size() == 4);
  CHECK(j.at("branches")[3].size() == 4);
  REQUIRE(j.at("events").size() == 1);
  CHECK(j.at("events")[0].at("type") == "pitchfork");
  CHECK(j.at("branches")[0][0].at("eigenvalues").size() == 5);

  const auto ly = lyapunov_spectrum(fig3_params(), kFig3Initial, 500.0, 1.0, 50.0);
  const Json lj = Json::parse(to_json(ly).dump());
  CHECK(lj.at("exponents").size() == 5);
  CHECK(!lj.at("trace").empty());
  CHECK(lj.at("horizon") == 500.0);
}

TEST_CASE("convex hull area") {
  std::vector<std::pair<double, double>> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  CHECK(convex_hull_area(square) == doctest::Approx(1.0));
  std::vector<std::pair<double, double>> line{{0, 0}, {1, 1}, {2, 2}};
  CHECK(convex_hull_area(line) == doctest::Approx(0.0));
  std::vector<std::pair<double, double>> tri{{0, 0}, {2, 0}, {0, 2}};
  CHECK(convex_hull_area(tri) == doctest::Approx(2.0));
}
