#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "pbeam/diagnostics.hpp"
#include "pbeam/errors.hpp"
#include "pbeam/integrator.hpp"
#include "pbeam/operators.hpp"
#include "pbeam/rhs.hpp"

using namespace pbeam;

namespace {

struct Setup {
  BeamConfig cfg;
  Mesh mesh;
  DiscreteOperators ops;
  Setup(BeamConfig c) : cfg(c), mesh(build_mesh(c.ell, c.n_cells)),
                        ops(build_operators(mesh)) {}
};

State zero_state(const Mesh& mesh) {
  State s;
  s.t = 0.0;
  s.u.assign(static_cast<std::size_t>(mesh.interior), 0.0);
  s.v.assign(static_cast<std::size_t>(mesh.interior), 0.0);
  return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    w = std::max(w, std::fabs(a[i] - b[i]));
  return w;
}

// Manufactured solution u(x, t) = g_h(x) sin(omega t) on the discrete grid:
// the forcing is built from the same discrete operators, so g_h sin(omega t)
// solves the semi-discrete system exactly and all remaining error is temporal.
struct Manufactured {
  std::vector<double> g, d4g, d2g, d1g;
  double sg = 0.0;
  double omega;
  BeamConfig cfg;

  Manufactured(const Setup& s, double om) : omega(om), cfg(s.cfg) {
    const int m = s.ops.m;
    g.resize(static_cast<std::size_t>(m));
    d4g.resize(static_cast<std::size_t>(m));
    d2g.resize(static_cast<std::size_t>(m));
    d1g.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const double x = s.mesh.x[static_cast<std::size_t>(i)];
      const double y = x * (s.mesh.ell - x);
      g[static_cast<std::size_t>(i)] = y * y; // x^2 (ell-x)^2, clamped shape
    }
    s.ops.apply_d4(g.data(), d4g.data());
    s.ops.apply_d2(g.data(), d2g.data());
    s.ops.apply_d1(g.data(), d1g.data());
    sg = s.ops.grad_norm_sq(g.data());
  }

  Forcing forcing() const {
    return [this](double t, const Mesh& mesh, double* f) {
      const double sn = std::sin(omega * t), cs = std::cos(omega * t);
      const double sig =
          cfg.lambda_flag != 0 ? cfg.b - cfg.b0 * sg * sn * sn : 0.0;
      for (int i = 0; i < mesh.interior; ++i) {
        const std::size_t j = static_cast<std::size_t>(i);
        // u_tt + D4 u + k u_t + sig D2 u + mu U D1 u = f  (p = 0)
        f[j] = -omega * omega * g[j] * sn + d4g[j] * sn +
               cfg.k * omega * g[j] * cs + cfg.mu * cfg.U * d1g[j] * sn +
               (cfg.lambda_flag != 0 ? sig * d2g[j] * sn : 0.0);
      }
    };
  }

  State initial(const Mesh& mesh) const {
    State s = zero_state(mesh);
    for (int i = 0; i < mesh.interior; ++i)
      s.v[static_cast<std::size_t>(i)] =
          omega * g[static_cast<std::size_t>(i)];
    return s;
  }

  double final_error(const State& s, double T) const {
    const double sn = std::sin(omega * T);
    double w = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i)
      w = std::max(w, std::fabs(s.u[i] - g[i] * sn));
    return w;
  }
};

} // namespace

TEST_CASE("the zero state is a fixed point when unforced") {
  BeamConfig cfg;
  cfg.n_cells = 16;
  cfg.U = 300.0;
  Setup s(cfg);
  IntegratorConfig icfg;
  icfg.fixed_dt = true;
  icfg.dt_init = 1e-3;
  State st = zero_state(s.mesh);
  for (auto scheme : {Scheme::average_acceleration, Scheme::bdf2}) {
    icfg.scheme = scheme;
    Integrator integ(s.cfg, s.mesh, s.ops, icfg);
    State cur = st;
    for (int i = 0; i < 5; ++i) {
      auto nx = integ.step(cur, icfg.dt_init);
      REQUIRE(nx.has_value());
      cur = *nx;
    }
    for (double v : cur.u) CHECK(v == 0.0);
    for (double v : cur.v) CHECK(v == 0.0);
  }
}

TEST_CASE("linear conservative run holds energy to 1e-10") {
  BeamConfig cfg;
  cfg.n_cells = 32;
  cfg.k = 0.0;
  cfg.U = 0.0;
  cfg.lambda_flag = 0;
  Setup s(cfg);
  IntegratorConfig icfg;
  State st = make_initial_state(s.cfg, s.mesh);
  Trajectory traj = integrate(st, 1.0, s.cfg, s.mesh, s.ops, icfg);
  REQUIRE_FALSE(traj.diverged);
  const double E0 = traj.records.front().E;
  REQUIRE(E0 > 0.0);
  double worst = 0.0;
  for (const auto& r : traj.records)
    worst = std::max(worst, std::fabs(r.E - E0) / E0);
  CHECK(worst <= 1e-10);
}

TEST_CASE("temporal convergence is second order for both schemes") {
  BeamConfig cfg;
  cfg.n_cells = 24;
  cfg.k = 1.0;
  cfg.U = 3.0;
  cfg.b = 1.0;
  cfg.b0 = 1.0;
  Setup s(cfg);
  Manufactured mms(s, 2.0);
  const double T = 0.5;

  for (auto scheme : {Scheme::average_acceleration, Scheme::bdf2}) {
    std::vector<double> errs;
    for (double dt : {1.0 / 128, 1.0 / 256, 1.0 / 512}) {
      IntegratorConfig icfg;
      icfg.scheme = scheme;
      icfg.fixed_dt = true;
      icfg.dt_init = dt;
      icfg.sample_dt = T; // only the end state matters
      Trajectory traj = integrate(mms.initial(s.mesh), T, s.cfg, s.mesh,
                                  s.ops, icfg, mms.forcing());
      errs.push_back(mms.final_error(traj.final_state, T));
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
      const double order = std::log2(errs[i - 1] / errs[i]);
      INFO("scheme ", to_string(scheme), " level ", i, " order ", order,
           " errs ", errs[i - 1], " -> ", errs[i]);
      CHECK(order > 1.8);
      CHECK(order < 2.2);
    }
  }
}

TEST_CASE("halving the tolerances does not increase the final error") {
  BeamConfig cfg;
  cfg.n_cells = 24;
  cfg.k = 1.0;
  cfg.b = 1.0;
  cfg.b0 = 1.0;
  Setup s(cfg);
  Manufactured mms(s, 2.0);
  const double T = 0.5;
  double prev = -1.0;
  for (double rtol : {1e-5, 5e-6, 2.5e-6}) {
    IntegratorConfig icfg;
    icfg.rtol = rtol;
    icfg.atol = rtol * 1e-2;
    icfg.sample_dt = 0.1;
    Trajectory traj = integrate(mms.initial(s.mesh), T, s.cfg, s.mesh, s.ops,
                                icfg, mms.forcing());
    const double err = mms.final_error(traj.final_state, T);
    if (prev >= 0.0) CHECK(err <= prev * 1.05);
    prev = err;
  }
}

TEST_CASE("trajectories are odd under negated initial data") {
  BeamConfig cfg;
  cfg.n_cells = 48;
  cfg.k = 1.0;
  cfg.U = 600.0;
  cfg.b = 0.0;
  cfg.b0 = 1.0;
  Setup s(cfg);
  IntegratorConfig icfg;
  State st = make_initial_state(s.cfg, s.mesh);
  State neg = st;
  for (auto& v : neg.u) v = -v;
  for (auto& v : neg.v) v = -v;

  Trajectory a = integrate(st, 0.3, s.cfg, s.mesh, s.ops, icfg);
  Trajectory b = integrate(neg, 0.3, s.cfg, s.mesh, s.ops, icfg);
  REQUIRE(a.records.size() == b.records.size());
  std::vector<double> bu = b.final_state.u, bv = b.final_state.v;
  for (auto& v : bu) v = -v;
  for (auto& v : bv) v = -v;
  // all kernel operations commute with global negation at the bit level
  CHECK(max_abs_diff(a.final_state.u, bu) == 0.0);
  CHECK(max_abs_diff(a.final_state.v, bv) == 0.0);
}

TEST_CASE("sample times are exact and monotone under stretching") {
  BeamConfig cfg;
  cfg.n_cells = 16;
  cfg.k = 1.0;
  Setup s(cfg);
  IntegratorConfig icfg;
  icfg.sample_dt = 1e-2 * std::acos(-1.0) / 3.0; // incommensurate with dt
  State st = make_initial_state(s.cfg, s.mesh);
  Trajectory traj = integrate(st, 0.2, s.cfg, s.mesh, s.ops, icfg);
  REQUIRE(traj.records.size() >= 2);
  // uniform interior gaps; the last sample lands on t_end, so its gap is
  // whatever remainder the horizon leaves
  for (std::size_t j = 1; j + 1 < traj.records.size(); ++j) {
    const double gap = traj.records[j].t - traj.records[j - 1].t;
    CHECK(gap == doctest::Approx(icfg.sample_dt).epsilon(1e-9));
  }
  const double last_gap =
      traj.records.back().t - traj.records[traj.records.size() - 2].t;
  CHECK(last_gap > 0.0);
  CHECK(last_gap <= icfg.sample_dt * (1.0 + 1e-9));
  CHECK(traj.final_state.t == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("blowup guard marks runaway growth as diverged, not an error") {
  BeamConfig cfg;
  cfg.n_cells = 32;
  cfg.k = 1.0;
  cfg.U = 1274.0;
  cfg.lambda_flag = 0; // linear supercritical: exponential blowup
  Setup s(cfg);
  IntegratorConfig icfg;
  icfg.rtol = 1e-6;
  icfg.atol = 1e-8;
  icfg.blowup_energy = 1e8;
  State st = make_initial_state(s.cfg, s.mesh);
  Trajectory traj = integrate(st, 5.0, s.cfg, s.mesh, s.ops, icfg);
  CHECK(traj.diverged);
  CHECK(traj.exit_time < 5.0);
  CHECK(traj.records.size() >= 2);
}

TEST_CASE("non-finite initial data is a hard numerical error") {
  BeamConfig cfg;
  cfg.n_cells = 16;
  Setup s(cfg);
  IntegratorConfig icfg;
  State st = zero_state(s.mesh);
  st.u[3] = std::nan("");
  Integrator integ(s.cfg, s.mesh, s.ops, icfg);
  CHECK_THROWS_AS(integ.step(st, 1e-4), NumericalError);
}
