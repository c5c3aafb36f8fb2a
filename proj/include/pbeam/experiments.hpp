#pragma once
#include <string>
#include <vector>

#include "pbeam/config.hpp"
#include "pbeam/diagnostics.hpp"
#include "pbeam/integrator.hpp"

namespace pbeam {

// ---------------------------------------------------------------- ucrit ----

struct UcritOptions {
  double tol_U = 2.0;      // stop when the bracket is this narrow
  double horizon = 6.0;    // probe integration time
  double fit_window = 0.5; // trailing fraction fed to the growth fit
  double band = 0.5;       // |sigma| below this counts as neutral
};

struct UcritProbe {
  double U = 0.0;
  GrowthEstimate est;
};

struct UcritReport {
  double U_crit = 0.0;           // midpoint of the final bracket
  double U_lo = 0.0, U_hi = 0.0; // final bracket
  std::vector<UcritProbe> probes;
};

// Bisects for the onset of flutter growth in the linear model. Requires
// cfg.lambda_flag == 0; the endpoint probes must straddle the transition
// (lower not growing, upper growing) or a ConfigError("bracket invalid...")
// is thrown. The two endpoint probes run concurrently.
UcritReport find_ucrit(const BeamConfig& cfg, double U_lo, double U_hi,
                       const IntegratorConfig& icfg,
                       const UcritOptions& opts = {});

// --------------------------------------------------------------- steady ----

enum class Stability { stable, unstable, diverged, not_assessed };
std::string to_string(Stability s);

struct SteadyOptions {
  double tol_rel = 1e-10; // on ||G||_h relative to ||D4 u||_h
  double tol_abs = 1e-12;
  int max_iters = 60;       // Newton budget per continuation level
  bool continuation = true; // ramp b from 0 when the Berger term is active
  double ramp_step = 5.0;
  bool assess_stability = true;
  double stab_T = 5.0;    // horizon of the perturbed relaxation run
  double stab_eps = 1e-3; // relative size of the probe perturbation
};

struct SteadyReport {
  std::vector<double> u_star;
  bool converged = false;
  double residual_norm = 0.0; // ||G(u*)||_h
  double scale = 0.0;         // ||D4 u*||_h, the relative-test yardstick
  int newton_iters = 0;       // total across continuation levels
  double E_star = 0.0;        // bending energy of u*
  double s_star = 0.0;        // ||u*_x||_h^2
  double b1_estimate = 0.0;   // first buckling load of the linearization
  Stability stability = Stability::not_assessed;
};

// Damped Newton with optional load continuation for the static balance
//   G(u) = -D4 u - lambda (b - b0 ||u_x||^2) D2 u - mu U D1 u + p = 0.
// Past the buckling load the trivial branch is abandoned via an eigenmode
// re-seed scaled to the predicted gradient norm. Stability is tagged by
// relaxing a small perturbation of u* over stab_T.
SteadyReport solve_steady_state(const BeamConfig& cfg, const Mesh& mesh,
                                const DiscreteOperators& ops,
                                const std::vector<double>& guess,
                                const SteadyOptions& opts = {},
                                const IntegratorConfig* stab_icfg = nullptr);

// Smallest positive load b1 with (D4 + mu U D1) phi = -b1 D2 phi nontrivial,
// by power iteration on the pencil. If `mode` is given it receives phi
// normalized to unit max amplitude with positive midpoint.
double first_buckling_load(const BeamConfig& cfg, const DiscreteOperators& ops,
                           std::vector<double>* mode = nullptr);

// --------------------------------------------------------------- cycles ----

struct CycleOptions {
  double rel_tol = 0.01;   // last-3 dominant peak heights must agree to this
  double floor_amp = 1e-6; // peak-to-peak below this is "no cycle"
  double dominance = 0.2;  // keep maxima within dominance*p2p of the top
};

struct CycleReport {
  bool conclusive = false; // enough extrema in the tail to judge at all
  bool converged = false;
  double period = 0.0;    // mean spacing of dominant maxima
  double amplitude = 0.0; // peak-to-peak of the tail signal
  int n_peaks = 0;        // dominant maxima kept
  double tail_t0 = 0.0, tail_t1 = 0.0;
};

// Periodicity scan of the sampled u_mid series over the trailing
// tail_fraction of the trajectory. Maxima are refined by parabolic
// interpolation; secondary humps of a multi-hump cycle are filtered out by
// the dominance cut before the period is measured. Fewer than 6 extrema in
// the tail makes the scan inconclusive (not an error).
CycleReport detect_limit_cycle(const Trajectory& traj,
                               double tail_fraction = 0.25,
                               const CycleOptions& opts = {});

// --------------------------------------------------------------- sweeps ----

struct SweepRow {
  double axis_value = 0.0;
  double final_E = 0.0;
  double sigma = 0.0;
  std::string classification = "neutral";
  double cycle_amplitude = 0.0; // zero unless a converged cycle was found
  double cycle_period = 0.0;
  bool ok = true;
  std::string error; // per-row failure message; the sweep itself continues
};

struct SweepTable {
  std::string axis;
  std::vector<SweepRow> rows; // same order as the requested values
};

// One integration per axis value (axis is one of U, k, b, b0), collecting
// the growth fit and cycle scan per row. Rows run concurrently in batches;
// a failing row records its error instead of aborting the table.
SweepTable run_sweep(const BeamConfig& base, const IntegratorConfig& icfg,
                     const std::string& axis,
                     const std::vector<double>& values, double horizon,
                     double fit_window = 0.5, double tail_fraction = 0.25);

} // namespace pbeam
