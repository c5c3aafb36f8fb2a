#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "pbeam/errors.hpp"
#include "pbeam/experiments.hpp"
#include "pbeam/operators.hpp"
#include "pbeam/rhs.hpp"

using namespace pbeam;

namespace {

IntegratorConfig loose() {
  IntegratorConfig icfg;
  icfg.rtol = 1e-6;
  icfg.atol = 1e-8;
  return icfg;
}

} // namespace

TEST_CASE("first buckling load of the convected linearization") {
  BeamConfig cfg;
  cfg.U = 100.0;
  const Mesh mesh = build_mesh(cfg.ell, cfg.n_cells);
  const auto ops = build_operators(mesh);
  std::vector<double> mode;
  const double b1 = first_buckling_load(cfg, ops, &mode);
  CHECK(b1 == doctest::Approx(44.994835).epsilon(1e-3));
  REQUIRE(static_cast<int>(mode.size()) == ops.m);
  // normalized buckling mode: unit amplitude, positive midpoint bow
  double peak = 0.0;
  for (double v : mode) peak = std::max(peak, std::fabs(v));
  CHECK(peak == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mode[static_cast<std::size_t>(ops.m / 2)] > 0.0);
}

TEST_CASE("buckled steady state above the critical load") {
  BeamConfig cfg;
  cfg.U = 100.0;
  cfg.k = 1.0;
  cfg.b = 50.0;
  cfg.b0 = 1.0;
  const Mesh mesh = build_mesh(cfg.ell, cfg.n_cells);
  const auto ops = build_operators(mesh);

  SteadyOptions opts;
  opts.assess_stability = false; // the long relaxation is covered elsewhere
  std::vector<double> guess(static_cast<std::size_t>(ops.m), 0.0);
  const SteadyReport rep = solve_steady_state(cfg, mesh, ops, guess, opts);

  REQUIRE(rep.converged);
  CHECK(rep.residual_norm <= 1e-10 * std::max(1.0, rep.scale));
  CHECK(rep.s_star == doctest::Approx(5.00516473).epsilon(1e-5));
  CHECK(rep.E_star == doctest::Approx(112.60328141).epsilon(1e-5));
  CHECK(rep.b1_estimate == doctest::Approx(44.994835).epsilon(1e-3));

  // sign pair: -u* satisfies the same balance (p = 0)
  RhsContext ctx(cfg, ops, mesh);
  std::vector<double> neg(rep.u_star), g(static_cast<std::size_t>(ops.m));
  for (auto& v : neg) v = -v;
  ctx.accel(neg.data(), 0.0, g.data());
  const double gn = std::sqrt(ops.ip(g.data(), g.data()));
  CHECK(gn <= 1e-10 * std::max(1.0, rep.scale));
}

TEST_CASE("below the buckling load only the flat state remains") {
  BeamConfig cfg;
  cfg.U = 100.0;
  cfg.b = 30.0; // under b1 ~ 45
  cfg.b0 = 1.0;
  const Mesh mesh = build_mesh(cfg.ell, cfg.n_cells);
  const auto ops = build_operators(mesh);
  SteadyOptions opts;
  opts.assess_stability = false;
  std::vector<double> guess(static_cast<std::size_t>(ops.m), 0.0);
  const SteadyReport rep = solve_steady_state(cfg, mesh, ops, guess, opts);
  REQUIRE(rep.converged);
  CHECK(rep.s_star <= 1e-8);
  double peak = 0.0;
  for (double v : rep.u_star) peak = std::max(peak, std::fabs(v));
  CHECK(peak <= 1e-6);
}

TEST_CASE("limit cycle detector on synthetic periodic data") {
  const double period = 0.16, amp = 2.2, T = 10.0, dt = 1e-3;
  Trajectory traj;
  const std::size_t n = static_cast<std::size_t>(T / dt) + 1;
  traj.records.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * dt;
    traj.records[j].t = t;
    traj.records[j].u_mid =
        amp * std::sin(2.0 * std::acos(-1.0) * t / period);
  }
  const CycleReport rep = detect_limit_cycle(traj, 0.25);
  CHECK(rep.conclusive);
  CHECK(rep.converged);
  CHECK(rep.period == doctest::Approx(period).epsilon(0.01));
  CHECK(rep.amplitude == doctest::Approx(2.0 * amp).epsilon(0.01));
  CHECK(rep.n_peaks >= 10);
}

TEST_CASE("limit cycle detector rejects decay and sub-floor wiggles") {
  const double dt = 1e-3;
  auto build = [&](auto f) {
    Trajectory traj;
    const std::size_t n = 10001;
    traj.records.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double t = static_cast<double>(j) * dt;
      traj.records[j].t = t;
      traj.records[j].u_mid = f(t);
    }
    return traj;
  };

  const double pi = std::acos(-1.0);
  Trajectory decay = build([&](double t) {
    return 2.0 * std::exp(-0.5 * t) * std::sin(2.0 * pi * t / 0.16);
  });
  const CycleReport rd = detect_limit_cycle(decay, 0.25);
  CHECK(rd.conclusive);
  CHECK_FALSE(rd.converged); // heights keep shrinking past the 1% box

  Trajectory flat = build([&](double t) {
    return 1e-9 * std::sin(2.0 * pi * t / 0.16);
  });
  const CycleReport rf = detect_limit_cycle(flat, 0.25);
  CHECK_FALSE(rf.converged); // below the non-triviality floor

  Trajectory still = build([](double) { return 0.0; });
  const CycleReport rs = detect_limit_cycle(still, 0.25);
  CHECK_FALSE(rs.conclusive); // no extrema at all
  CHECK_FALSE(rs.converged);
}

TEST_CASE("find_ucrit brackets the n=32 flutter threshold") {
  BeamConfig cfg;
  cfg.n_cells = 32;
  cfg.k = 0.0;
  cfg.lambda_flag = 0;
  UcritOptions opts;
  opts.tol_U = 25.0;
  const UcritReport rep = find_ucrit(cfg, 400.0, 900.0, loose(), opts);
  CHECK(rep.U_crit > 550.0);
  CHECK(rep.U_crit < 700.0);
  CHECK(rep.U_hi - rep.U_lo <= 25.0);
  CHECK(rep.probes.size() >= 4);
  // growing (or blown-up) verdicts only above the returned threshold
  for (const auto& p : rep.probes) {
    if (p.est.classification == Classification::growing ||
        p.est.classification == Classification::diverged)
      CHECK(p.U >= rep.U_lo);
    else
      CHECK(p.U <= rep.U_hi);
  }
}

TEST_CASE("find_ucrit rejects an invalid bracket by name") {
  BeamConfig cfg;
  cfg.n_cells = 32;
  cfg.k = 0.0;
  cfg.lambda_flag = 0;
  UcritOptions opts;
  opts.tol_U = 25.0;
  try {
    find_ucrit(cfg, 700.0, 900.0, loose(), opts); // grows at both ends
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bracket") != std::string::npos);
  }
  // the nonlinear model is not what the linear-threshold scan measures
  cfg.lambda_flag = 1;
  CHECK_THROWS_AS(find_ucrit(cfg, 400.0, 900.0, loose(), opts), ConfigError);
}

TEST_CASE("parameter sweep collects per-row results and isolates failures") {
  BeamConfig cfg;
  cfg.n_cells = 16;
  cfg.k = 1.0;
  IntegratorConfig icfg = loose();

  const SweepTable table =
      run_sweep(cfg, icfg, "U", {0.0, 50.0}, 0.5, 0.5, 0.25);
  CHECK(table.axis == "U");
  REQUIRE(table.rows.size() == 2);
  for (const auto& row : table.rows) {
    CHECK(row.ok);
    CHECK(row.error.empty());
    CHECK(std::isfinite(row.final_E));
    CHECK(!row.classification.empty());
  }
  CHECK(table.rows[0].axis_value == 0.0);
  CHECK(table.rows[1].axis_value == 50.0);

  // a bad axis value fails its row, not the sweep
  const SweepTable mixed = run_sweep(cfg, icfg, "b0", {-1.0, 1.0}, 0.2);
  REQUIRE(mixed.rows.size() == 2);
  CHECK_FALSE(mixed.rows[0].ok);
  CHECK(!mixed.rows[0].error.empty());
  CHECK(mixed.rows[1].ok);

  CHECK_THROWS_AS(run_sweep(cfg, icfg, "Q", {1.0}, 0.2), ConfigError);
}
