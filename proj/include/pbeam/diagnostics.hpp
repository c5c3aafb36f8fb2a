#pragma once
#include <string>
#include <vector>

#include "pbeam/config.hpp"
#include "pbeam/operators.hpp"
#include "pbeam/state.hpp"

namespace pbeam {

struct Trajectory; // defined in integrator.hpp

// One sampled row of the energy ledger.
//   E       = (1/2)[ (u, D4 u)_h + ||v||_h^2 ]          bending + kinetic
//   Pi_B    = lambda [ (b0/4) s^2 - (b/2) s ] - (p, u)_h with s = ||u_x||_h^2
//   E_nl    = E + Pi_B
//   diss    = k ||v||_h^2 + mu U (D1 u, v)_h             instantaneous drain
//   u_mid   = displacement at the node nearest ell/2
// residual stays 0 until energy_identity_residual() fills it in.
struct EnergyRecord {
  double t = 0.0;
  double E = 0.0;
  double E_nl = 0.0;
  double Pi_B = 0.0;
  double u_mid = 0.0;
  double diss = 0.0;
  double residual = 0.0;
};

EnergyRecord energies(const State& s, const BeamConfig& cfg,
                      const DiscreteOperators& ops, const Mesh& mesh);

enum class Classification { decaying, neutral, growing, diverged };

std::string to_string(Classification c);

struct GrowthEstimate {
  double sigma = 0.0; // d/dt log E over the fit window
  double r2 = 0.0;    // goodness of the log-linear fit
  Classification classification = Classification::neutral;
};

// Discrete energy balance check: for each interior sample j,
//   r_j = [E_nl(t_{j+1}) - E_nl(t_{j-1})] / (t_{j+1} - t_{j-1}) + diss_j.
// Exact solutions satisfy r = O(sample spacing^2); the integrator adds its
// own O(dt^2) on top. Requires >= 3 samples, else throws NumericalError.
// Returns the residuals (size n-2) and stores them into records[1..n-2].
std::vector<double> energy_identity_residual(Trajectory& traj);

// Least-squares slope of log E(t) over the trailing `window` fraction of the
// trajectory. A diverged trajectory is classified "diverged" without regard
// to the band; an identically-zero window reports neutral with sigma = 0.
// `band`: |sigma| <= band counts as neutral.
GrowthEstimate fit_growth_rate(const Trajectory& traj, double window = 0.5,
                               double band = 1e-2);

} // namespace pbeam
