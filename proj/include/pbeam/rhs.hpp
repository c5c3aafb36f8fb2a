#pragma once
#include <functional>
#include <vector>

#include "pbeam/config.hpp"
#include "pbeam/operators.hpp"
#include "pbeam/state.hpp"

namespace pbeam {

// Optional extra load f(t, x) added to the transverse force balance. Used by
// the manufactured-solution tests to drive the integrator with a known exact
// solution; production runs leave it empty.
using Forcing = std::function<void(double t, const Mesh& mesh, double* f)>;

// Checks config invariants (positivity, profile lengths, preset names).
// Throws ConfigError naming the offending field.
void validate(const BeamConfig& cfg, const Mesh& mesh);

// Pressure at the interior nodes: either the constant value or the explicit
// per-node profile (which must have exactly mesh.interior entries).
std::vector<double> pressure_samples(const BeamConfig& cfg, const Mesh& mesh);

// Initial (u, v) at t = 0 from the config's init block. The default preset
// starts from rest displacement with a parabolic velocity impulse
// v0 = a x (ell - x); "explicit" copies the provided nodal samples.
State make_initial_state(const BeamConfig& cfg, const Mesh& mesh);

// Everything the semi-discrete force balance needs besides the state itself.
// Holds the pressure samples so repeated evaluations do not re-parse config.
struct RhsContext {
  const BeamConfig* cfg = nullptr;
  const DiscreteOperators* ops = nullptr;
  const Mesh* mesh = nullptr;
  std::vector<double> pressure; // interior samples
  Forcing forcing;              // empty unless a test injects one

  RhsContext() = default;
  RhsContext(const BeamConfig& c, const DiscreteOperators& o, const Mesh& m);

  // accel = -D4 u - lambda (b - b0 s(u)) D2 u - mu U D1 u + p [+ f(t)].
  // This is the velocity-independent part of dv/dt; callers add -k v.
  // `u` and `accel` must not alias. Scratch-free: uses the two work buffers.
  void accel(const double* u, double t, double* accel) const;

  // Full first-order right-hand side: du = v, dv = accel(u, t) - k v.
  void rhs(const State& s, double* du, double* dv) const;

private:
  mutable std::vector<double> work_;
};

// True if any entry of u or v is NaN/inf.
bool has_nonfinite(const State& s);

} // namespace pbeam
