#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbeam/config.hpp"
#include "pbeam/diagnostics.hpp"
#include "pbeam/rhs.hpp"
#include "pbeam/state.hpp"

namespace pbeam {

enum class Scheme { average_acceleration, bdf2 };

Scheme scheme_from_string(const std::string& name); // throws ConfigError
std::string to_string(Scheme s);

struct IntegratorConfig {
  Scheme scheme = Scheme::average_acceleration;
  double rtol = 1e-8;
  double atol = 1e-10;
  double dt_init = 1e-4;
  double dt_min = 1e-12;
  double dt_max = 1e-2;
  double sample_dt = 1e-3;
  int newton_max_iters = 25;
  double newton_tol = 1e-12;   // relative update size for convergence
  double blowup_energy = 1e12; // sampled E above this marks the run diverged
  bool store_states = false;   // keep full (u, v) snapshots at samples
  bool fixed_dt = false;       // take dt_init steps verbatim, no error control
};

struct StepStats {
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t newton_iters = 0;
  std::int64_t factorizations = 0;
  double dt_final = 0.0;
};

struct Trajectory {
  std::vector<EnergyRecord> records; // one per sample time
  std::vector<State> states;         // parallel to records iff store_states
  State final_state;                 // last accepted state
  bool diverged = false;
  double exit_time = 0.0; // time of the sample that tripped the guard
  StepStats stats;
};

// Adaptive implicit integrator for the semi-discrete beam system. One
// instance owns the work buffers and the banded factorization cache, so
// reuse across calls amortizes setup.
class Integrator {
public:
  Integrator(const BeamConfig& cfg, const Mesh& mesh,
             const DiscreteOperators& ops, const IntegratorConfig& icfg);

  // Injected load hook for manufactured-solution tests.
  void set_forcing(Forcing f);

  // One step of the configured scheme from `s` with step size dt. Returns
  // std::nullopt when Newton fails to converge (the caller should retry
  // with a smaller dt). The two-step scheme bootstraps its missing history
  // with an average-acceleration step. Throws NumericalError for a
  // non-finite input state.
  std::optional<State> step(const State& s, double dt);

  // Integrate from s0 to t_end, sampling the energy ledger every sample_dt.
  // Local error is controlled by step doubling against (rtol, atol); a
  // sampled energy above blowup_energy truncates the run and marks it
  // diverged (a legitimate outcome, not an error). Throws NumericalError
  // if dt underflows dt_min.
  Trajectory integrate(const State& s0, double t_end);

  const RhsContext& context() const { return ctx_; }

private:
  struct PairState { // history slot: state plus cached acceleration
    State s;
    std::vector<double> a; // accel(u, t), no -kv part
    bool have_a = false;
  };

  void ensure_accel(PairState& p);
  // Solve the implicit stage equation; w out, true on Newton success.
  bool solve_stage(const std::vector<double>& rhs_const, double ci, double cb,
                   double t_new, std::vector<double>& w);
  // `from` is non-const so its acceleration cache can be filled lazily.
  bool step_trap(PairState& from, double dt, PairState& out);
  bool step_bdf2(const PairState& older, PairState& from, double h_prev,
                 double dt, PairState& out);
  void refactor(double ci, double cb, double sigma);

  const BeamConfig& cfg_;
  const Mesh& mesh_;
  const DiscreteOperators& ops_;
  IntegratorConfig icfg_;
  RhsContext ctx_;
  int m_ = 0;

  // banded Newton matrix cache
  class BandedLU* lu_ = nullptr; // owned, defined in banded.hpp
  double fact_ci_ = 0.0, fact_cb_ = 0.0, fact_sigma_ = 0.0;
  bool factored_ = false;
  std::int64_t factorizations_ = 0;
  std::int64_t newton_iters_ = 0;

  std::vector<double> z_, g_, dw_, r_, scr_;

public:
  ~Integrator();
  Integrator(const Integrator&) = delete;
  Integrator& operator=(const Integrator&) = delete;
};

// Convenience wrappers matching the one-shot call signatures used by the
// experiment drivers and tests.
std::optional<State> step(const State& s, double dt, const BeamConfig& cfg,
                          const Mesh& mesh, const DiscreteOperators& ops,
                          const IntegratorConfig& icfg);

Trajectory integrate(const State& s0, double t_end, const BeamConfig& cfg,
                     const Mesh& mesh, const DiscreteOperators& ops,
                     const IntegratorConfig& icfg, Forcing forcing = {});

} // namespace pbeam
