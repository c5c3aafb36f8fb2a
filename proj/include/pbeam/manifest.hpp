#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "pbeam/config.hpp"
#include "pbeam/integrator.hpp"

namespace pbeam {

// Experiment-level knobs, one flat block so manifests stay diffable.
struct ExperimentParams {
  double T = 1.0; // simulate horizon

  // critical-velocity search
  double u_lo = 500.0, u_hi = 800.0;
  double tol_U = 2.0;
  double ucrit_horizon = 6.0;
  double probe_band = 0.5;  // neutral |sigma| band for probes
  double fit_window = 0.5;  // trailing fraction for growth fits

  // steady state
  bool continuation = true;
  double ramp_step = 5.0;
  double stab_T = 5.0;

  // limit cycle
  double cycle_T = 10.0;
  double tail_fraction = 0.25;
  double cycle_rel_tol = 0.01;
  double cycle_floor = 1e-6;
  double dominance = 0.2;

  // sweep
  std::string axis = "U";
  std::vector<double> values;
  double sweep_T = 2.0;
};

// Everything one run needs, resolved against defaults, plus provenance.
// Every output directory gets the canonical emission of its manifest, so a
// result file is reproducible from the sidecar alone.
struct RunManifest {
  BeamConfig beam;
  IntegratorConfig integrator;
  ExperimentParams experiment;
  std::string version;     // tool version that produced the run
  std::uint64_t checksum = 0; // FNV-1a over the canonical parameter text
};

// Manifest with all documented defaults (equivalent to an empty config).
RunManifest default_manifest();

// Parse an INI-style config: [beam] / [integrator] / [experiment] sections
// with key = value lines, '#' or ';' comments. Unknown sections or keys are
// rejected by name, as are type and constraint violations. `overrides`
// holds --set style "key=value" or "section.key=value" entries applied on
// top of the file.
RunManifest parse_config(const std::string& path,
                         const std::vector<std::string>& overrides = {});
RunManifest parse_config_text(const std::string& text,
                              const std::vector<std::string>& overrides = {});

// Canonical emission: fixed section and key order, 17-digit numbers.
// parse(emit(m)) == m, and emit(parse(emit(m))) is byte-identical.
std::string emit_config(const RunManifest& m);

// FNV-1a 64-bit over the canonical [beam]+[integrator]+[experiment] text.
std::uint64_t manifest_checksum(const RunManifest& m);

} // namespace pbeam
