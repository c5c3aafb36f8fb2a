#include "pbeam/csv.hpp"

#include <cstdio>
#include <fstream>

#include "pbeam/errors.hpp"

namespace pbeam {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,E,E_nl,Pi_B,u_mid,residual\n";
  for (const EnergyRecord& r : traj.records)
    os << fmt17(r.t) << ',' << fmt17(r.E) << ',' << fmt17(r.E_nl) << ','
       << fmt17(r.Pi_B) << ',' << fmt17(r.u_mid) << ',' << fmt17(r.residual)
       << '\n';
}

void write_steady_csv(std::ostream& os, const Mesh& mesh,
                      const std::vector<double>& u_star) {
  os << "x,u_star\n";
  os << fmt17(0.0) << ',' << fmt17(0.0) << '\n';
  for (size_t i = 0; i < u_star.size(); ++i)
    os << fmt17(mesh.x[i]) << ',' << fmt17(u_star[i]) << '\n';
  os << fmt17(mesh.ell) << ',' << fmt17(0.0) << '\n';
}

void write_sweep_csv(std::ostream& os, const SweepTable& table) {
  os << "axis_value,final_E,sigma,classification,cycle_amplitude,cycle_period\n";
  for (const SweepRow& row : table.rows) {
    std::string label = row.ok ? row.classification : "error: " + row.error;
    for (char& c : label)
      if (c == ',' || c == '\n') c = ';';
    os << fmt17(row.axis_value) << ',' << fmt17(row.final_E) << ','
       << fmt17(row.sigma) << ',' << label << ',' << fmt17(row.cycle_amplitude)
       << ',' << fmt17(row.cycle_period) << '\n';
  }
}

void write_probes_csv(std::ostream& os, const UcritReport& rep) {
  os << "U,sigma,r2,classification\n";
  for (const UcritProbe& p : rep.probes)
    os << fmt17(p.U) << ',' << fmt17(p.est.sigma) << ',' << fmt17(p.est.r2)
       << ',' << to_string(p.est.classification) << '\n';
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << body;
  if (!f) throw ConfigError("failed writing output file: " + path);
}

} // namespace pbeam
