#include "pbeam/rhs.hpp"

#include <cmath>
#include <string>

#include "pbeam/errors.hpp"
#include "pbeam/kernels.hpp"

namespace pbeam {

void validate(const BeamConfig& cfg, const Mesh& mesh) {
  if (!(cfg.ell > 0.0)) throw ConfigError("beam.ell must be positive");
  if (!(cfg.k >= 0.0)) throw ConfigError("beam.k must be non-negative");
  if (!(cfg.mu >= 0.0)) throw ConfigError("beam.mu must be non-negative");
  if (!(cfg.U >= 0.0)) throw ConfigError("beam.U must be non-negative");
  if (cfg.lambda_flag != 0 && cfg.lambda_flag != 1)
    throw ConfigError("beam.lambda must be 0 or 1");
  if (!(cfg.b0 >= 0.0)) throw ConfigError("beam.b0 must be non-negative");
  if (cfg.n_cells < 8) throw ConfigError("beam.n_cells must be at least 8");
  if (!std::isfinite(cfg.b)) throw ConfigError("beam.b must be finite");
  if (!std::isfinite(cfg.pressure.value))
    throw ConfigError("beam.pressure must be finite");

  if (!cfg.pressure.profile.empty() &&
      cfg.pressure.profile.size() != static_cast<size_t>(mesh.interior))
    throw ConfigError("beam.pressure_profile must have n_cells-1 entries, got " +
                      std::to_string(cfg.pressure.profile.size()));

  const InitialData& init = cfg.init;
  if (init.preset == "explicit") {
    const size_t m = static_cast<size_t>(mesh.interior);
    if (init.u0.size() != m)
      throw ConfigError("init.u0 must have n_cells-1 entries, got " +
                        std::to_string(init.u0.size()));
    if (init.v0.size() != m)
      throw ConfigError("init.v0 must have n_cells-1 entries, got " +
                        std::to_string(init.v0.size()));
  } else if (init.preset != "parabolic-velocity") {
    throw ConfigError("init.preset must be 'parabolic-velocity' or 'explicit', got '" +
                      init.preset + "'");
  }
}

std::vector<double> pressure_samples(const BeamConfig& cfg, const Mesh& mesh) {
  const int m = mesh.interior;
  if (!cfg.pressure.profile.empty()) {
    if (cfg.pressure.profile.size() != static_cast<size_t>(m))
      throw ConfigError("beam.pressure_profile must have n_cells-1 entries");
    return cfg.pressure.profile;
  }
  return std::vector<double>(static_cast<size_t>(m), cfg.pressure.value);
}

State make_initial_state(const BeamConfig& cfg, const Mesh& mesh) {
  validate(cfg, mesh);
  const int m = mesh.interior;
  State s;
  s.t = 0.0;
  s.u.assign(static_cast<size_t>(m), 0.0);
  s.v.assign(static_cast<size_t>(m), 0.0);
  if (cfg.init.preset == "explicit") {
    s.u = cfg.init.u0;
    s.v = cfg.init.v0;
  } else {
    // Rest displacement, parabolic velocity impulse a x (ell - x).
    const double a = cfg.init.amplitude;
    for (int i = 0; i < m; ++i) {
      const double x = mesh.x[static_cast<size_t>(i)];
      s.v[static_cast<size_t>(i)] = a * x * (cfg.ell - x);
    }
  }
  return s;
}

RhsContext::RhsContext(const BeamConfig& c, const DiscreteOperators& o,
                       const Mesh& m)
    : cfg(&c), ops(&o), mesh(&m), pressure(pressure_samples(c, m)),
      work_(static_cast<size_t>(m.interior)) {}

void RhsContext::accel(const double* u, double t, double* out) const {
  const int m = ops->m;
  // out = -D4 u
  ops->apply_d4(u, out);
  for (int i = 0; i < m; ++i) out[i] = -out[i];

  // Berger restoring force: -lambda (b - b0 s(u)) D2 u.
  if (cfg->lambda_flag != 0) {
    const double sigma = cfg->b - cfg->b0 * ops->grad_norm_sq(u);
    ops->apply_d2(u, work_.data());
    kernels().axpy(-sigma, work_.data(), out, m);
  }

  // Convective aerodynamic term: -mu U D1 u.
  const double muU = cfg->mu * cfg->U;
  if (muU != 0.0) {
    ops->apply_d1(u, work_.data());
    kernels().axpy(-muU, work_.data(), out, m);
  }

  // Static pressure load.
  for (int i = 0; i < m; ++i) out[i] += pressure[static_cast<size_t>(i)];

  // Optional injected load (manufactured solutions).
  if (forcing) {
    work_.assign(static_cast<size_t>(m), 0.0);
    forcing(t, *mesh, work_.data());
    kernels().axpy(1.0, work_.data(), out, m);
  }
}

void RhsContext::rhs(const State& s, double* du, double* dv) const {
  const int m = ops->m;
  for (int i = 0; i < m; ++i) du[i] = s.v[static_cast<size_t>(i)];
  accel(s.u.data(), s.t, dv);
  if (cfg->k != 0.0)
    kernels().axpy(-cfg->k, s.v.data(), dv, m);
}

bool has_nonfinite(const State& s) {
  for (double x : s.u)
    if (!std::isfinite(x)) return true;
  for (double x : s.v)
    if (!std::isfinite(x)) return true;
  return false;
}

} // namespace pbeam
