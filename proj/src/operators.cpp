#include "pbeam/operators.hpp"

#include "pbeam/errors.hpp"
#include "pbeam/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace pbeam {

Mesh build_mesh(double ell, int n_cells) {
  if (!(ell > 0.0)) throw ConfigError("beam.ell must be positive");
  if (n_cells < 8)
    throw ConfigError("beam.n_cells must be at least 8");
  Mesh mesh;
  mesh.ell = ell;
  mesh.n_cells = n_cells;
  mesh.dx = ell / n_cells;
  mesh.interior = n_cells - 1;
  mesh.x.resize(static_cast<std::size_t>(mesh.interior));
  for (int i = 0; i < mesh.interior; ++i)
    mesh.x[static_cast<std::size_t>(i)] = (i + 1) * mesh.dx;
  return mesh;
}

DiscreteOperators build_operators(const Mesh& mesh) {
  DiscreteOperators ops;
  ops.dx = mesh.dx;
  ops.m = mesh.interior;
  ops.d1_c = 1.0 / (2.0 * mesh.dx);
  ops.d2_c = 1.0 / (mesh.dx * mesh.dx);
  ops.d4_c = 1.0 / (mesh.dx * mesh.dx * mesh.dx * mesh.dx);
  return ops;
}

void DiscreteOperators::apply_d1(const double* u, double* out) const {
  kernels().penta_apply(u, out, static_cast<std::size_t>(m), 0.0, -d1_c, 0.0,
                        d1_c, 0.0);
}

void DiscreteOperators::apply_d2(const double* u, double* out) const {
  kernels().penta_apply(u, out, static_cast<std::size_t>(m), 0.0, d2_c,
                        -2.0 * d2_c, d2_c, 0.0);
}

void DiscreteOperators::apply_d4(const double* u, double* out) const {
  kernels().penta_apply(u, out, static_cast<std::size_t>(m), d4_c, -4.0 * d4_c,
                        6.0 * d4_c, -4.0 * d4_c, d4_c);
  // Ghost mirror u_{-1} = u_1 adds +1/dx^4 * u at the two end rows.
  out[0] += d4_c * u[0];
  out[m - 1] += d4_c * u[m - 1];
}

double DiscreteOperators::ip(const double* a, const double* b) const {
  return dx * kernels().dot(a, b, static_cast<std::size_t>(m));
}

double DiscreteOperators::grad_norm_sq(const double* u) const {
  return kernels().diff_sq_sum(u, static_cast<std::size_t>(m)) / dx;
}

double DiscreteOperators::bend_quad(const double* u) const {
  // Nodal curvatures with u_0 = u_N = 0 and mirror ghosts: c_0 = 2 u_1/dx^2,
  // c_N = 2 u_{N-1}/dx^2, end weights 1/2 (trapezoid). The interior sum
  // telescopes against (u, D4 u)_h exactly.
  double sum = 2.0 * u[0] * u[0] + 2.0 * u[m - 1] * u[m - 1];
  double prev = 0.0;
  for (int i = 0; i < m; ++i) {
    const double next = i + 1 < m ? u[i + 1] : 0.0;
    const double c = next - 2.0 * u[i] + prev;
    sum += c * c;
    prev = u[i];
  }
  return sum * dx / (dx * dx * dx * dx);
}

void DiscreteOperators::fill_banded(BandedMatrix& a, double ci, double c4,
                                    double c2, double c1) const {
  a.clear();
  const double w4 = c4 * d4_c;
  const double w2 = c2 * d2_c;
  const double w1 = c1 * d1_c;
  const double diag = ci + 6.0 * w4 - 2.0 * w2;
  const double off1p = -4.0 * w4 + w2 + w1;
  const double off1m = -4.0 * w4 + w2 - w1;
  for (int i = 0; i < m; ++i) {
    a.at(i, i) = diag;
    if (i + 1 < m) {
      a.at(i, i + 1) = off1p;
      a.at(i + 1, i) = off1m;
    }
    if (i + 2 < m) {
      a.at(i, i + 2) = w4;
      a.at(i + 2, i) = w4;
    }
  }
  a.at(0, 0) += w4;
  a.at(m - 1, m - 1) += w4;
}

void berger_force(const double* u, double b, double b0,
                  const DiscreteOperators& ops, double* out) {
  const double coeff = b - b0 * ops.grad_norm_sq(u);
  ops.apply_d2(u, out);
  for (int i = 0; i < ops.m; ++i) out[i] *= coeff;
}

double smallest_d4_eigenvalue(const DiscreteOperators& ops) {
  const int m = ops.m;
  BandedMatrix a(m, 2, 2);
  ops.fill_banded(a, 0.0, 1.0, 0.0, 0.0);
  BandedLU lu;
  lu.factor(a);
  std::vector<double> y(static_cast<std::size_t>(m), 1.0);
  std::vector<double> d4y(static_cast<std::size_t>(m));
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    lu.solve(y.data());
    const double nrm = std::sqrt(
        kernels().dot(y.data(), y.data(), static_cast<std::size_t>(m)));
    for (auto& q : y) q /= nrm;
    ops.apply_d4(y.data(), d4y.data());
    const double next =
        kernels().dot(y.data(), d4y.data(), static_cast<std::size_t>(m));
    if (it > 2 && std::fabs(next - lambda) <= 1e-13 * std::fabs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

double clamped_beam_beta1() {
  auto f = [](double b) { return std::cos(b) * std::cosh(b) - 1.0; };
  double lo = 4.0, hi = 5.5;
  // f(4) < 0 < f(5.5); bisect to full double resolution.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace pbeam
