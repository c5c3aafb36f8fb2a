#pragma once
#include <ostream>
#include <string>
#include <vector>

#include "pbeam/experiments.hpp"
#include "pbeam/integrator.hpp"
#include "pbeam/mesh.hpp"

namespace pbeam {

// Full-precision decimal (17 significant digits): parsing the text back
// recovers the exact double, so downstream fits reproduce in-process math.
std::string fmt17(double v);

// header: t,E,E_nl,Pi_B,u_mid,residual
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

// header: x,u_star  (clamped endpoints included as explicit zeros)
void write_steady_csv(std::ostream& os, const Mesh& mesh,
                      const std::vector<double>& u_star);

// header: axis_value,final_E,sigma,classification,cycle_amplitude,cycle_period
void write_sweep_csv(std::ostream& os, const SweepTable& table);

// header: U,sigma,r2,classification  (bisection audit trail)
void write_probes_csv(std::ostream& os, const UcritReport& rep);

// Convenience: open `path` and write with the matching stream writer.
void write_file(const std::string& path, const std::string& body);

} // namespace pbeam
