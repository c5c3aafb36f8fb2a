#include "pbeam/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <thread>

#include "pbeam/banded.hpp"
#include "pbeam/errors.hpp"
#include "pbeam/kernels.hpp"
#include "pbeam/rhs.hpp"

namespace pbeam {
namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool is_growing(const GrowthEstimate& e) {
  return e.classification == Classification::growing ||
         e.classification == Classification::diverged;
}

} // namespace

// ---------------------------------------------------------------- ucrit ----

UcritReport find_ucrit(const BeamConfig& cfg0, double U_lo, double U_hi,
                       const IntegratorConfig& icfg, const UcritOptions& opts) {
  if (cfg0.lambda_flag != 0)
    throw ConfigError("find_ucrit requires lambda = 0 (linear model)");
  if (!(U_lo >= 0.0) || !(U_hi > U_lo))
    throw ConfigError("bracket invalid: need 0 <= U_lo < U_hi");
  if (!(opts.tol_U > 0.0))
    throw ConfigError("ucrit tolerance must be positive");

  auto probe = [&](double U) -> UcritProbe {
    BeamConfig cfg = cfg0;
    cfg.U = U;
    Mesh mesh = build_mesh(cfg.ell, cfg.n_cells);
    DiscreteOperators ops = build_operators(mesh);
    State s0 = make_initial_state(cfg, mesh);
    Trajectory traj = integrate(s0, opts.horizon, cfg, mesh, ops, icfg);
    return {U, fit_growth_rate(traj, opts.fit_window, opts.band)};
  };

  UcritReport rep;
  // endpoint validation probes are independent; overlap them
  auto lo_fut = std::async(std::launch::async, probe, U_lo);
  auto hi_fut = std::async(std::launch::async, probe, U_hi);
  UcritProbe plo = lo_fut.get();
  UcritProbe phi = hi_fut.get();
  rep.probes.push_back(plo);
  rep.probes.push_back(phi);

  if (is_growing(plo.est))
    throw ConfigError("bracket invalid: lower endpoint U=" + fmt_g(U_lo) +
                      " is already growing (sigma=" + fmt_g(plo.est.sigma) +
                      ")");
  if (!is_growing(phi.est))
    throw ConfigError("bracket invalid: upper endpoint U=" + fmt_g(U_hi) +
                      " is not growing (sigma=" + fmt_g(phi.est.sigma) + ")");

  while (U_hi - U_lo > opts.tol_U) {
    const double mid = 0.5 * (U_lo + U_hi);
    UcritProbe p = probe(mid);
    rep.probes.push_back(p);
    (is_growing(p.est) ? U_hi : U_lo) = mid;
  }
  rep.U_lo = U_lo;
  rep.U_hi = U_hi;
  rep.U_crit = 0.5 * (U_lo + U_hi);
  return rep;
}

// --------------------------------------------------------------- steady ----

std::string to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::diverged: return "diverged";
    case Stability::not_assessed: return "not-assessed";
  }
  return "not-assessed";
}

double first_buckling_load(const BeamConfig& cfg, const DiscreteOperators& ops,
                           std::vector<double>* mode) {
  const int m = ops.m;
  BandedMatrix a(m, 2, 2);
  ops.fill_banded(a, 0.0, 1.0, 0.0, cfg.mu * cfg.U); // D4 + mu U D1
  BandedLU lu;
  lu.factor(a);

  // power iteration on (D4 + mu U D1)^{-1} (-D2): dominant eigenvalue 1/b1
  std::vector<double> y(static_cast<size_t>(m)), w(static_cast<size_t>(m));
  const double ell = ops.dx * static_cast<double>(m + 1);
  for (int i = 0; i < m; ++i) { // smooth positive seed
    const double x = ops.dx * static_cast<double>(i + 1);
    y[static_cast<size_t>(i)] = x * (ell - x);
  }

  double b1 = 0.0, b1_prev = 0.0;
  for (int it = 0; it < 200; ++it) {
    ops.apply_d2(y.data(), w.data());
    for (int i = 0; i < m; ++i) w[static_cast<size_t>(i)] = -w[static_cast<size_t>(i)];
    lu.solve(w.data());
    const double nrm = std::sqrt(kernels().dot(w.data(), w.data(), m));
    if (!(nrm > 0.0) || !std::isfinite(nrm))
      throw NumericalError("buckling-load iteration broke down");
    for (int i = 0; i < m; ++i) y[static_cast<size_t>(i)] = w[static_cast<size_t>(i)] / nrm;

    // Rayleigh quotient b1 = (y, (D4 + mu U D1) y) / (y, -D2 y)
    ops.apply_d4(y.data(), w.data());
    double num = kernels().dot(y.data(), w.data(), m);
    if (cfg.mu * cfg.U != 0.0) {
      ops.apply_d1(y.data(), w.data());
      num += cfg.mu * cfg.U * kernels().dot(y.data(), w.data(), m);
    }
    ops.apply_d2(y.data(), w.data());
    const double den = -kernels().dot(y.data(), w.data(), m);
    b1 = num / den;
    if (it > 3 && std::abs(b1 - b1_prev) <= 1e-12 * std::abs(b1)) break;
    b1_prev = b1;
  }

  if (mode) {
    // unit max amplitude, positive at the midpoint
    double amax = 0.0;
    for (double v : y) amax = std::max(amax, std::abs(v));
    const double mid = y[static_cast<size_t>((m - 1) / 2)];
    const double scale = (mid < 0.0 ? -1.0 : 1.0) / amax;
    mode->resize(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
      (*mode)[static_cast<size_t>(i)] = y[static_cast<size_t>(i)] * scale;
  }
  return b1;
}

namespace {

struct NewtonOutcome {
  bool converged = false;
  double gnorm = 0.0;
  double scale = 0.0;
  int iters = 0;
};

// Damped Newton on G(u) = -D4 u - lambda (b - b0 s) D2 u - mu U D1 u + p
// with a banded + rank-one Jacobian and a residual-decrease line search.
NewtonOutcome steady_newton(std::vector<double>& u, const BeamConfig& cfg,
                            const DiscreteOperators& ops,
                            const std::vector<double>& p, double tol_rel,
                            double tol_abs, int max_iters) {
  const int m = ops.m;
  const double muU = cfg.mu * cfg.U;
  const bool nonlinear = cfg.lambda_flag != 0 && cfg.b0 > 0.0;
  std::vector<double> g(static_cast<size_t>(m)), w(static_cast<size_t>(m)),
      z(static_cast<size_t>(m)), du(static_cast<size_t>(m)),
      trial(static_cast<size_t>(m)), gt(static_cast<size_t>(m));

  auto eval_G = [&](const std::vector<double>& x, std::vector<double>& out) {
    ops.apply_d4(x.data(), out.data());
    for (int i = 0; i < m; ++i)
      out[static_cast<size_t>(i)] =
          -out[static_cast<size_t>(i)] + p[static_cast<size_t>(i)];
    if (cfg.lambda_flag != 0) {
      const double sigma = cfg.b - cfg.b0 * ops.grad_norm_sq(x.data());
      ops.apply_d2(x.data(), w.data());
      kernels().axpy(-sigma, w.data(), out.data(), m);
    }
    if (muU != 0.0) {
      ops.apply_d1(x.data(), w.data());
      kernels().axpy(-muU, w.data(), out.data(), m);
    }
  };
  auto hnorm = [&](const std::vector<double>& x) {
    return std::sqrt(ops.ip(x.data(), x.data()));
  };

  NewtonOutcome res;
  BandedMatrix a(m, 2, 2);
  BandedLU lu;

  eval_G(u, g);
  double gn = hnorm(g);
  for (int it = 0; it < max_iters; ++it) {
    ops.apply_d4(u.data(), w.data());
    res.scale = hnorm(w);
    const double tol = std::max(tol_abs, tol_rel * res.scale);
    if (gn <= tol) {
      res.converged = true;
      break;
    }
    ++res.iters;

    const double sigma =
        cfg.lambda_flag != 0 ? cfg.b - cfg.b0 * ops.grad_norm_sq(u.data())
                             : 0.0;
    ops.fill_banded(a, 0.0, -1.0, cfg.lambda_flag != 0 ? -sigma : 0.0, -muU);
    lu.factor(a);
    bool solved = true;
    if (nonlinear) {
      ops.apply_d2(u.data(), z.data());
      solved = solve_rank1_update(lu, -2.0 * cfg.b0 * ops.dx, z.data(),
                                  g.data(), du.data(), m);
    } else {
      std::copy(g.begin(), g.end(), du.begin());
      lu.solve(du.data());
    }
    if (!solved) break;

    // backtracking: require a sufficient decrease of ||G||
    double step = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (int i = 0; i < m; ++i)
        trial[static_cast<size_t>(i)] =
            u[static_cast<size_t>(i)] - step * du[static_cast<size_t>(i)];
      eval_G(trial, gt);
      const double gnt = hnorm(gt);
      if (std::isfinite(gnt) && gnt < (1.0 - 0.25 * step) * gn) {
        u.swap(trial);
        g.swap(gt);
        gn = gnt;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break; // stagnated (e.g. at the rounding floor)
  }

  ops.apply_d4(u.data(), w.data());
  res.scale = hnorm(w);
  res.gnorm = gn;
  res.converged = gn <= std::max(tol_abs, tol_rel * res.scale);
  return res;
}

} // namespace

SteadyReport solve_steady_state(const BeamConfig& cfg, const Mesh& mesh,
                                const DiscreteOperators& ops,
                                const std::vector<double>& guess,
                                const SteadyOptions& opts,
                                const IntegratorConfig* stab_icfg) {
  validate(cfg, mesh);
  const int m = ops.m;
  const std::vector<double> p = pressure_samples(cfg, mesh);

  std::vector<double> u;
  if (guess.empty()) {
    u.assign(static_cast<size_t>(m), 0.0);
  } else if (guess.size() == static_cast<size_t>(m)) {
    u = guess;
  } else {
    throw ConfigError("steady-state guess must have n_cells-1 entries, got " +
                      std::to_string(guess.size()));
  }

  SteadyReport rep;
  const bool nonlinear = cfg.lambda_flag != 0 && cfg.b0 > 0.0;
  int total_iters = 0;

  if (nonlinear && opts.continuation && cfg.b > 0.0) {
    std::vector<double> mode;
    rep.b1_estimate = first_buckling_load(cfg, ops, &mode);
    double bl = std::min(cfg.b, opts.ramp_step);
    for (;;) {
      BeamConfig level = cfg;
      level.b = bl;
      NewtonOutcome nr = steady_newton(u, level, ops, p, opts.tol_rel,
                                       opts.tol_abs, opts.max_iters);
      total_iters += nr.iters;

      // Past the buckling load the trivial branch is an unstable artifact;
      // re-seed with the buckling mode scaled to the predicted amplitude.
      if (bl > rep.b1_estimate) {
        const double s_here = ops.grad_norm_sq(u.data());
        const double s_target = (bl - rep.b1_estimate) / cfg.b0;
        if (s_target > 0.0 && s_here < 0.01 * s_target) {
          const double sm = ops.grad_norm_sq(mode.data());
          const double c = std::sqrt(s_target / sm);
          for (int i = 0; i < m; ++i)
            u[static_cast<size_t>(i)] = c * mode[static_cast<size_t>(i)];
          nr = steady_newton(u, level, ops, p, opts.tol_rel, opts.tol_abs,
                             opts.max_iters);
          total_iters += nr.iters;
        }
      }
      if (bl >= cfg.b) {
        rep.converged = nr.converged;
        rep.residual_norm = nr.gnorm;
        rep.scale = nr.scale;
        break;
      }
      bl = std::min(cfg.b, bl + opts.ramp_step);
    }
  } else {
    NewtonOutcome nr = steady_newton(u, cfg, ops, p, opts.tol_rel,
                                     opts.tol_abs, opts.max_iters);
    total_iters = nr.iters;
    rep.converged = nr.converged;
    rep.residual_norm = nr.gnorm;
    rep.scale = nr.scale;
    if (nonlinear) rep.b1_estimate = first_buckling_load(cfg, ops);
  }

  rep.u_star = u;
  rep.newton_iters = total_iters;
  std::vector<double> w(static_cast<size_t>(m));
  ops.apply_d4(u.data(), w.data());
  rep.E_star = 0.5 * ops.ip(u.data(), w.data());
  rep.s_star = ops.grad_norm_sq(u.data());

  if (opts.assess_stability && stab_icfg != nullptr) {
    // relax a small perturbation of u* and watch whether it returns
    double umax = 1.0;
    for (double v : u) umax = std::max(umax, std::abs(v));
    State s0;
    s0.t = 0.0;
    s0.u = u;
    s0.v.assign(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
      const double x = mesh.x[static_cast<size_t>(i)];
      s0.u[static_cast<size_t>(i)] +=
          opts.stab_eps * umax * x * (cfg.ell - x) * 4.0 / (cfg.ell * cfg.ell);
    }
    Trajectory traj = integrate(s0, opts.stab_T, cfg, mesh, ops, *stab_icfg);
    if (traj.diverged) {
      rep.stability = Stability::diverged;
    } else {
      auto dist = [&](const State& s) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
          const double d =
              s.u[static_cast<size_t>(i)] - u[static_cast<size_t>(i)];
          acc += d * d;
        }
        return std::sqrt(ops.dx * acc);
      };
      const double d0 = dist(s0);
      const double dT = dist(traj.final_state);
      rep.stability = dT <= d0 ? Stability::stable : Stability::unstable;
    }
  }
  return rep;
}

// --------------------------------------------------------------- cycles ----

CycleReport detect_limit_cycle(const Trajectory& traj, double tail_fraction,
                               const CycleOptions& opts) {
  CycleReport rep;
  const auto& rec = traj.records;
  if (rec.size() < 8) return rep;
  tail_fraction = std::clamp(tail_fraction, 0.01, 1.0);

  const double t_end = rec.back().t;
  const double t_cut = t_end - tail_fraction * (t_end - rec.front().t);
  size_t first = 0;
  while (first < rec.size() && rec[first].t < t_cut) ++first;
  const size_t n = rec.size() - first;
  if (n < 8) return rep;
  rep.tail_t0 = rec[first].t;
  rep.tail_t1 = t_end;

  auto yv = [&](size_t j) { return rec[first + j].u_mid; };
  auto tv = [&](size_t j) { return rec[first + j].t; };

  double ymin = yv(0), ymax = yv(0);
  for (size_t j = 1; j < n; ++j) {
    ymin = std::min(ymin, yv(j));
    ymax = std::max(ymax, yv(j));
  }
  const double p2p = ymax - ymin;
  rep.amplitude = p2p;

  // interior extrema + parabolic refinement of the maxima
  int extrema = 0;
  std::vector<double> pk_t, pk_y;
  for (size_t j = 1; j + 1 < n; ++j) {
    const double dl = yv(j) - yv(j - 1);
    const double dr = yv(j + 1) - yv(j);
    if (dl > 0.0 && dr < 0.0) { // local maximum
      ++extrema;
      const double den = yv(j - 1) - 2.0 * yv(j) + yv(j + 1);
      double toff = 0.0, ypk = yv(j);
      if (den < 0.0) {
        const double delta = 0.5 * (yv(j - 1) - yv(j + 1)) / den;
        const double h = 0.5 * (tv(j + 1) - tv(j - 1));
        toff = delta * h;
        ypk = yv(j) - 0.25 * (yv(j - 1) - yv(j + 1)) * delta;
      }
      pk_t.push_back(tv(j) + toff);
      pk_y.push_back(ypk);
    } else if (dl < 0.0 && dr > 0.0) {
      ++extrema; // local minimum, only counted
    }
  }

  if (extrema < 6) return rep; // not enough oscillation to judge
  rep.conclusive = true;
  if (p2p <= opts.floor_amp) return rep; // flat tail: no cycle

  // dominance cut rejects the secondary humps of a multi-hump cycle
  double top = pk_y.empty() ? ymax : *std::max_element(pk_y.begin(), pk_y.end());
  const double cut = top - opts.dominance * p2p;
  std::vector<double> kt, ky;
  for (size_t j = 0; j < pk_y.size(); ++j)
    if (pk_y[j] >= cut) {
      kt.push_back(pk_t[j]);
      ky.push_back(pk_y[j]);
    }
  rep.n_peaks = static_cast<int>(kt.size());
  if (kt.size() < 2) return rep;

  rep.period = (kt.back() - kt.front()) / static_cast<double>(kt.size() - 1);
  if (kt.size() < 3) return rep;

  double h_lo = ky[ky.size() - 3], h_hi = h_lo, h_sum = 0.0;
  for (size_t j = ky.size() - 3; j < ky.size(); ++j) {
    h_lo = std::min(h_lo, ky[j]);
    h_hi = std::max(h_hi, ky[j]);
    h_sum += ky[j];
  }
  const double h_ref = std::max(std::abs(h_sum) / 3.0, opts.floor_amp);
  rep.converged = (h_hi - h_lo) <= opts.rel_tol * h_ref;
  return rep;
}

// --------------------------------------------------------------- sweeps ----

namespace {

void set_axis(BeamConfig& cfg, const std::string& axis, double v) {
  if (axis == "U") cfg.U = v;
  else if (axis == "k") cfg.k = v;
  else if (axis == "b") cfg.b = v;
  else if (axis == "b0") cfg.b0 = v;
  else throw ConfigError("sweep axis must be one of U, k, b, b0; got '" + axis + "'");
}

} // namespace

SweepTable run_sweep(const BeamConfig& base, const IntegratorConfig& icfg,
                     const std::string& axis, const std::vector<double>& values,
                     double horizon, double fit_window, double tail_fraction) {
  { // validate the axis name up front, not per row
    BeamConfig probe = base;
    set_axis(probe, axis, base.U);
  }
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (!(horizon > 0.0)) throw ConfigError("sweep horizon must be positive");

  SweepTable table;
  table.axis = axis;
  table.rows.resize(values.size());

  auto worker = [&](size_t i) {
    SweepRow& row = table.rows[i];
    row.axis_value = values[i];
    try {
      BeamConfig cfg = base;
      set_axis(cfg, axis, values[i]);
      Mesh mesh = build_mesh(cfg.ell, cfg.n_cells);
      DiscreteOperators ops = build_operators(mesh);
      State s0 = make_initial_state(cfg, mesh);
      Trajectory traj = integrate(s0, horizon, cfg, mesh, ops, icfg);
      row.final_E = traj.records.back().E;
      GrowthEstimate est = fit_growth_rate(traj, fit_window);
      row.sigma = est.sigma;
      row.classification = to_string(est.classification);
      CycleReport cyc = detect_limit_cycle(traj, tail_fraction);
      if (cyc.converged) {
        row.cycle_amplitude = cyc.amplitude;
        row.cycle_period = cyc.period;
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  };

  const size_t nw = std::max(1u, std::thread::hardware_concurrency());
  for (size_t start = 0; start < values.size(); start += nw) {
    const size_t stop = std::min(values.size(), start + nw);
    std::vector<std::future<void>> batch;
    batch.reserve(stop - start);
    for (size_t i = start; i < stop; ++i)
      batch.push_back(std::async(std::launch::async, worker, i));
    for (auto& f : batch) f.get();
  }
  return table;
}

} // namespace pbeam
