#include "pbeam/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pbeam/errors.hpp"
#include "pbeam/integrator.hpp"
#include "pbeam/kernels.hpp"
#include "pbeam/rhs.hpp"

namespace pbeam {

std::string to_string(Classification c) {
  switch (c) {
    case Classification::decaying: return "decaying";
    case Classification::neutral: return "neutral";
    case Classification::growing: return "growing";
    case Classification::diverged: return "diverged";
  }
  return "neutral";
}

EnergyRecord energies(const State& s, const BeamConfig& cfg,
                      const DiscreteOperators& ops, const Mesh& mesh) {
  const int m = ops.m;
  std::vector<double> work(static_cast<size_t>(m));
  EnergyRecord rec;
  rec.t = s.t;

  rec.E =
      0.5 * (ops.bend_quad(s.u.data()) + ops.ip(s.v.data(), s.v.data()));

  const double sgn = ops.grad_norm_sq(s.u.data());
  rec.Pi_B = cfg.lambda_flag != 0
                 ? (0.25 * cfg.b0 * sgn * sgn - 0.5 * cfg.b * sgn)
                 : 0.0;
  // Pressure potential -(p, u)_h applies regardless of the Berger switch.
  if (!cfg.pressure.profile.empty()) {
    rec.Pi_B -= ops.ip(cfg.pressure.profile.data(), s.u.data());
  } else if (cfg.pressure.value != 0.0) {
    double sum = 0.0;
    for (double ui : s.u) sum += ui;
    rec.Pi_B -= cfg.pressure.value * ops.dx * sum;
  }
  rec.E_nl = rec.E + rec.Pi_B;

  rec.diss = cfg.k * ops.ip(s.v.data(), s.v.data());
  const double muU = cfg.mu * cfg.U;
  if (muU != 0.0) {
    ops.apply_d1(s.u.data(), work.data());
    rec.diss += muU * ops.ip(work.data(), s.v.data());
  }

  const int j_mid = (cfg.n_cells + 1) / 2 - 1; // interior index nearest ell/2
  rec.u_mid = s.u[static_cast<size_t>(std::clamp(j_mid, 0, m - 1))];
  (void)mesh;
  return rec;
}

std::vector<double> energy_identity_residual(Trajectory& traj) {
  auto& rec = traj.records;
  const size_t n = rec.size();
  if (n < 3)
    throw NumericalError(
        "energy identity residual requires at least 3 samples, got " +
        std::to_string(n));
  std::vector<double> out;
  out.reserve(n - 2);
  for (size_t j = 1; j + 1 < n; ++j) {
    const double dt2 = rec[j + 1].t - rec[j - 1].t;
    const double r =
        (rec[j + 1].E_nl - rec[j - 1].E_nl) / dt2 + rec[j].diss;
    rec[j].residual = r;
    out.push_back(r);
  }
  return out;
}

GrowthEstimate fit_growth_rate(const Trajectory& traj, double window,
                               double band) {
  const auto& rec = traj.records;
  const size_t n = rec.size();
  GrowthEstimate est;
  if (traj.diverged) est.classification = Classification::diverged;
  if (n < 2) {
    if (!traj.diverged)
      throw NumericalError("growth fit requires at least 2 samples, got " +
                           std::to_string(n));
    return est; // diverged almost immediately; slope is meaningless
  }

  window = std::clamp(window, 0.0, 1.0);
  size_t count = static_cast<size_t>(
      std::ceil(window * static_cast<double>(n)));
  count = std::clamp<size_t>(count, 2, n);
  const size_t first = n - count;

  bool all_zero = true;
  for (size_t j = first; j < n; ++j)
    if (rec[j].E > 0.0) { all_zero = false; break; }
  if (all_zero) {
    est.sigma = 0.0;
    est.r2 = 1.0;
    if (!traj.diverged) est.classification = Classification::neutral;
    return est;
  }

  // Least squares on (t, log E), flooring E to keep the log finite.
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (size_t j = first; j < n; ++j) {
    const double t = rec[j].t;
    const double y = std::log(std::max(rec[j].E, 1e-300));
    st += t; sy += y; stt += t * t; sty += t * y;
  }
  const double nn = static_cast<double>(count);
  const double denom = nn * stt - st * st;
  if (denom <= 0.0)
    throw NumericalError("growth fit: degenerate sample times");
  est.sigma = (nn * sty - st * sy) / denom;
  const double intercept = (sy - est.sigma * st) / nn;

  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / nn;
  for (size_t j = first; j < n; ++j) {
    const double y = std::log(std::max(rec[j].E, 1e-300));
    const double fit = intercept + est.sigma * rec[j].t;
    ss_res += (y - fit) * (y - fit);
    ss_tot += (y - ybar) * (y - ybar);
  }
  // A flat log-energy sequence has only roundoff variance; the fit is then
  // exact by construction and r^2 reports 1 rather than a 0/0 artifact.
  const double var_floor = 1e-24 * (1.0 + ybar * ybar) * nn;
  est.r2 = ss_tot <= var_floor ? 1.0 : 1.0 - ss_res / ss_tot;

  if (!traj.diverged) {
    if (est.sigma > band) est.classification = Classification::growing;
    else if (est.sigma < -band) est.classification = Classification::decaying;
    else est.classification = Classification::neutral;
  }
  return est;
}

} // namespace pbeam
