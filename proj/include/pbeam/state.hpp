#pragma once
#include <vector>

namespace pbeam {

struct State {
  double t = 0.0;
  std::vector<double> u; // displacement, interior nodes
  std::vector<double> v; // velocity u_t, interior nodes
};

} // namespace pbeam
