#pragma once
#include <string>
#include <vector>

namespace pbeam {

// Static transverse load. Either a constant value or a profile sampled at the
// interior nodes (resampled on mesh construction is the caller's business).
struct Pressure {
  double value = 0.0;
  std::vector<double> profile; // when non-empty, overrides `value`
};

// Initial data: the standard preset is u0 == 0 with a parabolic velocity
// profile u1(x) = a x (ell - x); explicit node samples are accepted too.
struct InitialData {
  std::string preset = "parabolic-velocity"; // or "explicit"
  double amplitude = 10.0;
  std::vector<double> u0, v0; // interior samples, used when preset=="explicit"
};

// Physical configuration of the piston-theoretic beam
//   u_tt + u_xxxx + k u_t + lambda (b - b0 ||u_x||^2) u_xx = p - mu U u_x
// with clamped-clamped ends. b > 0 is in-axis compression (destabilizing).
struct BeamConfig {
  double ell = 1.0;
  double k = 1.0;  // total damping
  double mu = 1.0; // flow coupling strength
  double U = 0.0;  // flow velocity
  int lambda_flag = 1; // Berger nonlinearity on/off
  double b = 0.0;
  double b0 = 1.0;
  int n_cells = 100;
  Pressure pressure;
  InitialData init;
};

} // namespace pbeam
