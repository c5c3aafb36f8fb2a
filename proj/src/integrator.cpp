#include "pbeam/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "pbeam/banded.hpp"
#include "pbeam/errors.hpp"
#include "pbeam/kernels.hpp"

namespace pbeam {
namespace {

std::string fmt_time(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", t);
  return buf;
}

} // namespace

Scheme scheme_from_string(const std::string& name) {
  if (name == "average-acceleration") return Scheme::average_acceleration;
  if (name == "bdf2" || name == "BDF2") return Scheme::bdf2;
  throw ConfigError("unknown scheme '" + name +
                    "' (expected 'average-acceleration' or 'bdf2')");
}

std::string to_string(Scheme s) {
  return s == Scheme::bdf2 ? "bdf2" : "average-acceleration";
}

Integrator::Integrator(const BeamConfig& cfg, const Mesh& mesh,
                       const DiscreteOperators& ops,
                       const IntegratorConfig& icfg)
    : cfg_(cfg), mesh_(mesh), ops_(ops), icfg_(icfg), ctx_(cfg, ops, mesh),
      m_(ops.m), lu_(new BandedLU()),
      z_(static_cast<size_t>(ops.m)), g_(static_cast<size_t>(ops.m)),
      dw_(static_cast<size_t>(ops.m)), r_(static_cast<size_t>(ops.m)),
      scr_(static_cast<size_t>(ops.m)) {
  validate(cfg, mesh);
  if (!(icfg.rtol > 0.0) || !(icfg.atol > 0.0))
    throw ConfigError("integrator tolerances must be positive");
  if (!(icfg.sample_dt > 0.0))
    throw ConfigError("integrator.sample_dt must be positive");
  if (!(icfg.dt_min > 0.0) || !(icfg.dt_max >= icfg.dt_min) ||
      !(icfg.dt_init > 0.0))
    throw ConfigError("integrator step bounds must satisfy 0 < dt_min <= dt_max");
  if (icfg.newton_max_iters < 1)
    throw ConfigError("integrator.newton_max_iters must be at least 1");
}

Integrator::~Integrator() { delete lu_; }

void Integrator::set_forcing(Forcing f) { ctx_.forcing = std::move(f); }

void Integrator::ensure_accel(PairState& p) {
  if (p.have_a) return;
  p.a.resize(static_cast<size_t>(m_));
  ctx_.accel(p.s.u.data(), p.s.t, p.a.data());
  p.have_a = true;
}

void Integrator::refactor(double ci, double cb, double sigma) {
  BandedMatrix a(m_, 2, 2);
  const double c2 = cfg_.lambda_flag != 0 ? cb * sigma : 0.0;
  ops_.fill_banded(a, ci, cb, c2, cb * cfg_.mu * cfg_.U);
  lu_->factor(a);
  factored_ = true;
  fact_ci_ = ci;
  fact_cb_ = cb;
  fact_sigma_ = sigma;
  ++factorizations_;
}

// Newton solve of the stage equation R(w) = ci w - cb A(w, t_new) - rc = 0.
// The Jacobian ci I + cb (D4 + lambda sigma D2 + mu U D1) + cb 2 lambda b0
// dx z z^T (z = D2 w) splits into a cached banded factorization plus a
// rank-one Sherman-Morrison correction. With the Berger term switched off
// the residual is affine and a single solve is exact.
bool Integrator::solve_stage(const std::vector<double>& rc, double ci,
                             double cb, double t_new, std::vector<double>& w) {
  const int m = m_;
  const bool nonlinear = cfg_.lambda_flag != 0 && cfg_.b0 != 0.0;
  const int max_iters = nonlinear ? icfg_.newton_max_iters : 1;

  for (int iter = 0; iter < max_iters; ++iter) {
    ++newton_iters_;
    ctx_.accel(w.data(), t_new, scr_.data());
    bool finite = true;
    for (int i = 0; i < m; ++i) {
      g_[static_cast<size_t>(i)] =
          ci * w[static_cast<size_t>(i)] - cb * scr_[static_cast<size_t>(i)] -
          rc[static_cast<size_t>(i)];
      if (!std::isfinite(g_[static_cast<size_t>(i)])) { finite = false; break; }
    }
    if (!finite) return false;

    const double sigma_w =
        cfg_.lambda_flag != 0
            ? cfg_.b - cfg_.b0 * ops_.grad_norm_sq(w.data())
            : 0.0;
    if (!factored_ || fact_ci_ != ci || fact_cb_ != cb ||
        (nonlinear &&
         std::abs(sigma_w - fact_sigma_) > 0.01 * (1.0 + std::abs(fact_sigma_))))
      refactor(ci, cb, sigma_w);

    if (nonlinear) {
      ops_.apply_d2(w.data(), z_.data());
      const double alpha = cb * 2.0 * cfg_.b0 * ops_.dx;
      if (!solve_rank1_update(*lu_, alpha, z_.data(), g_.data(), dw_.data(), m))
        return false;
    } else {
      std::copy(g_.begin(), g_.end(), dw_.begin());
      lu_->solve(dw_.data());
    }

    double dmax = 0.0, wmax = 0.0;
    for (int i = 0; i < m; ++i) {
      w[static_cast<size_t>(i)] -= dw_[static_cast<size_t>(i)];
      dmax = std::max(dmax, std::abs(dw_[static_cast<size_t>(i)]));
      wmax = std::max(wmax, std::abs(w[static_cast<size_t>(i)]));
    }
    if (!std::isfinite(dmax) || !std::isfinite(wmax)) return false;
    if (!nonlinear) return true; // affine stage equation: one solve is exact
    if (dmax <= icfg_.newton_tol * (1.0 + wmax)) return true;
  }
  return false;
}

// Average-acceleration (trapezoidal) step. With gamma = dt k / 2 the stage
// equation is (1+gamma) w - (dt^2/4) A(w) = (1+gamma) u + dt v + (dt^2/4) A(u)
// and the new velocity follows from the displacement update exactly.
bool Integrator::step_trap(PairState& from, double dt, PairState& out) {
  ensure_accel(from);
  const int m = m_;
  const double gamma = 0.5 * dt * cfg_.k;
  const double ci = 1.0 + gamma;
  const double cb = 0.25 * dt * dt;
  const double t_new = from.s.t + dt;

  out.s.u.resize(static_cast<size_t>(m));
  const double pc = 0.5 * dt * dt / ci;
  for (int i = 0; i < m; ++i) {
    const size_t k = static_cast<size_t>(i);
    r_[k] = ci * from.s.u[k] + dt * from.s.v[k] + cb * from.a[k];
    out.s.u[k] = from.s.u[k] + dt * from.s.v[k] + pc * from.a[k];
  }
  if (!solve_stage(r_, ci, cb, t_new, out.s.u)) return false;

  // Velocity in force form, (1+g) v' = (1-g) v + (dt/2)(A_n + A(w)): the
  // algebraically equivalent v' = (2/dt)(w-u) - v amplifies roundoff in w
  // by 2/dt and visibly biases long conservative runs.
  out.a.resize(static_cast<size_t>(m));
  ctx_.accel(out.s.u.data(), t_new, out.a.data());
  out.have_a = true;
  out.s.t = t_new;
  out.s.v.resize(static_cast<size_t>(m));
  const double cv = (1.0 - gamma) / ci;
  const double cf = 0.5 * dt / ci;
  for (int i = 0; i < m; ++i) {
    const size_t k = static_cast<size_t>(i);
    out.s.v[k] = cv * from.s.v[k] + cf * (from.a[k] + out.a[k]);
  }
  return true;
}

// Variable-step two-step backward differentiation step from (older, from)
// with spacing h_prev to t + dt. Velocity and displacement updates are
// decoupled through the same stage unknown w = u_{n+1}.
bool Integrator::step_bdf2(const PairState& older, PairState& from,
                           double h_prev, double dt, PairState& out) {
  ensure_accel(from);
  const int m = m_;
  const double rho = dt / h_prev;
  const double den = 1.0 + 2.0 * rho;
  const double a = (1.0 + rho) * (1.0 + rho) / den;
  const double b = -rho * rho / den;
  const double th = dt * (1.0 + rho) / den; // theta * h
  const double beta = th / (1.0 + th * cfg_.k);
  const double cb = beta * th;
  const double t_new = from.s.t + dt;

  out.s.u.resize(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const size_t k = static_cast<size_t>(i);
    r_[k] = a * from.s.u[k] + b * older.s.u[k] +
            beta * (a * from.s.v[k] + b * older.s.v[k]);
    out.s.u[k] = r_[k] + cb * from.a[k];
  }
  if (!solve_stage(r_, 1.0, cb, t_new, out.s.u)) return false;

  out.a.resize(static_cast<size_t>(m));
  ctx_.accel(out.s.u.data(), t_new, out.a.data());
  out.have_a = true;
  out.s.t = t_new;
  out.s.v.resize(static_cast<size_t>(m));
  const double iden = 1.0 / (1.0 + th * cfg_.k);
  for (int i = 0; i < m; ++i) {
    const size_t k = static_cast<size_t>(i);
    out.s.v[k] =
        (a * from.s.v[k] + b * older.s.v[k] + th * out.a[k]) * iden;
  }
  return true;
}

std::optional<State> Integrator::step(const State& s, double dt) {
  if (has_nonfinite(s))
    throw NumericalError("non-finite state at t=" + fmt_time(s.t));
  if (!(dt > 0.0)) throw ConfigError("step size must be positive");
  PairState from;
  from.s = s;
  PairState out;
  // Without retained history the two-step scheme bootstraps with an
  // average-acceleration step; integrate() supplies real history.
  if (!step_trap(from, dt, out)) return std::nullopt;
  return std::move(out.s);
}

Trajectory Integrator::integrate(const State& s0, double t_end) {
  if (has_nonfinite(s0))
    throw NumericalError("non-finite initial state at t=" + fmt_time(s0.t));
  const double t0 = s0.t;
  if (!(t_end >= t0))
    throw ConfigError("t_end must not precede the initial time");

  Trajectory traj;
  const double span = t_end - t0;
  traj.records.reserve(static_cast<size_t>(
      std::min(span / icfg_.sample_dt + 2.0, 4.0e6)));

  auto emit = [&](const State& s) -> bool {
    EnergyRecord rec = energies(s, cfg_, ops_, mesh_);
    traj.records.push_back(rec);
    if (icfg_.store_states) traj.states.push_back(s);
    if (!std::isfinite(rec.E) || rec.E > icfg_.blowup_energy) {
      traj.diverged = true;
      traj.exit_time = s.t;
      return false;
    }
    return true;
  };

  PairState cur;
  cur.s = s0;
  PairState prev;
  bool have_prev = false;
  double h_prev = 0.0;

  bool ok = emit(cur.s);
  long js = 1; // index of the next sample on the grid t0 + js*sample_dt

  double dt = std::clamp(icfg_.dt_init, icfg_.dt_min, icfg_.dt_max);
  if (!icfg_.fixed_dt) dt = std::min(dt, icfg_.sample_dt);
  double err_prev = 1.0;
  const double t_eps = 1e-12 * std::max(1.0, std::abs(t_end));

  while (ok && cur.s.t < t_end - t_eps) {
    const double t_sample = t0 + static_cast<double>(js) * icfg_.sample_dt;
    const double t_stop = std::min(t_end, t_sample);
    const double dt_ctrl = dt;
    // stretch up to 5% to land exactly on the next event instead of
    // leaving a roundoff sliver behind
    const double gap = t_stop - cur.s.t;
    double dt_eff = gap <= 1.05 * dt_ctrl ? gap : dt_ctrl;
    const bool use_bdf2 = icfg_.scheme == Scheme::bdf2 && have_prev;
    if (use_bdf2 && !icfg_.fixed_dt) dt_eff = std::min(dt_eff, 2.0 * h_prev);
    // A sliver that still slipped through carries negligible local error,
    // but its estimate would be swamped by 2/dt-amplified roundoff in the
    // velocity recovery; integrate it unchecked to keep the controller sane.
    const bool exempt =
        icfg_.fixed_dt ||
        dt_eff <= std::max(4.0 * icfg_.dt_min, 1e-6 * dt_ctrl);

    PairState c;
    bool okc = use_bdf2 ? step_bdf2(prev, cur, h_prev, dt_eff, c)
                        : step_trap(cur, dt_eff, c);
    PairState f2;
    bool okf = okc;
    double err = 0.0;

    if (exempt) {
      f2 = std::move(c); // bare scheme step, no halving comparison
    } else if (okc) {
      PairState f1;
      okf = step_trap(cur, 0.5 * dt_eff, f1);
      if (okf)
        okf = use_bdf2
                  ? step_bdf2(cur, f1, 0.5 * dt_eff, 0.5 * dt_eff, f2)
                  : step_trap(f1, 0.5 * dt_eff, f2);
      if (okf) {
        for (int i = 0; i < m_; ++i)
          scr_[static_cast<size_t>(i)] = c.s.u[static_cast<size_t>(i)] -
                                         f2.s.u[static_cast<size_t>(i)];
        const double eu = kernels().wrms(scr_.data(), f2.s.u.data(),
                                         cur.s.u.data(), icfg_.atol,
                                         icfg_.rtol, m_);
        for (int i = 0; i < m_; ++i)
          scr_[static_cast<size_t>(i)] = c.s.v[static_cast<size_t>(i)] -
                                         f2.s.v[static_cast<size_t>(i)];
        const double ev = kernels().wrms(scr_.data(), f2.s.v.data(),
                                         cur.s.v.data(), icfg_.atol,
                                         icfg_.rtol, m_);
        // step doubling: coarse - fine ~ 3x the fine-solution error
        err = std::sqrt(0.5 * (eu * eu + ev * ev)) / 3.0;
        if (!std::isfinite(err)) okf = false;
      }
    }

    if (!okc || !okf || (!exempt && err > 1.0)) {
      ++traj.stats.rejected;
      if (icfg_.fixed_dt)
        throw NumericalError("Newton failed at fixed step size, t=" +
                             fmt_time(cur.s.t));
      const double fac =
          (!okc || !okf)
              ? 0.25
              : std::clamp(0.9 * std::pow(std::max(err, 1e-10), -1.0 / 3.0),
                           0.1, 0.5);
      double dt_new = dt_eff * fac;
      if (dt_new < icfg_.dt_min) {
        if (dt_eff <= icfg_.dt_min * (1.0 + 1e-9))
          throw NumericalError("step size underflow at t=" +
                               fmt_time(cur.s.t));
        dt_new = icfg_.dt_min;
      }
      dt = dt_new;
      err_prev = 1.0;
      continue;
    }

    ++traj.stats.accepted;
    prev = std::move(cur);
    cur = std::move(f2);
    h_prev = dt_eff;
    // Exempt slivers leave microscopic history spacing; the 2*h_prev cap
    // would then strangle the next step, so bootstrap instead. (Fixed-dt
    // runs keep history: their spacing is uniform by construction.)
    have_prev = icfg_.fixed_dt || !exempt;

    if (!exempt) {
      err = std::max(err, 1e-10);
      const double fac_max = icfg_.scheme == Scheme::bdf2 ? 2.0 : 5.0;
      const double fac =
          std::clamp(0.9 * std::pow(err, -0.7 / 3.0) *
                         std::pow(err_prev, 0.4 / 3.0),
                     0.2, fac_max);
      dt = std::clamp(dt_ctrl * fac, icfg_.dt_min, icfg_.dt_max);
      err_prev = err;
    }

    if (cur.s.t >= t_sample - 1e-9 * icfg_.sample_dt) {
      ok = emit(cur.s);
      ++js;
    } else if (cur.s.t >= t_end - t_eps) {
      ok = emit(cur.s); // horizon off the sample grid: keep the endpoint
    }
  }

  traj.final_state = cur.s;
  traj.stats.newton_iters = newton_iters_;
  traj.stats.factorizations = factorizations_;
  traj.stats.dt_final = dt;
  if (!traj.diverged) traj.exit_time = cur.s.t;
  return traj;
}

std::optional<State> step(const State& s, double dt, const BeamConfig& cfg,
                          const Mesh& mesh, const DiscreteOperators& ops,
                          const IntegratorConfig& icfg) {
  Integrator ig(cfg, mesh, ops, icfg);
  return ig.step(s, dt);
}

Trajectory integrate(const State& s0, double t_end, const BeamConfig& cfg,
                     const Mesh& mesh, const DiscreteOperators& ops,
                     const IntegratorConfig& icfg, Forcing forcing) {
  Integrator ig(cfg, mesh, ops, icfg);
  if (forcing) ig.set_forcing(std::move(forcing));
  return ig.integrate(s0, t_end);
}

} // namespace pbeam
