#pragma once
#include <vector>

namespace pbeam {

// Uniform grid on [0, ell]. Displacement unknowns live at the interior nodes
// x_1..x_{N-1}; the clamped boundary values are eliminated, not carried.
struct Mesh {
  double ell = 1.0;
  int n_cells = 100;
  double dx = 0.01;
  int interior = 99; // n_cells - 1
  std::vector<double> x; // interior node coordinates, x[i] = (i+1)*dx
};

// Throws ConfigError when n_cells < 8 (the stencil needs at least three
// interior nodes on each side) or ell <= 0.
Mesh build_mesh(double ell, int n_cells);

} // namespace pbeam
