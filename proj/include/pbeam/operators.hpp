#pragma once
#include "pbeam/banded.hpp"
#include "pbeam/mesh.hpp"

#include <vector>

namespace pbeam {

// Second-order central-difference operators on the interior nodes with the
// clamped closure u_0 = u_N = 0 and ghost mirror u_{-1} = u_1, u_{N+1} =
// u_{N-1} (only the fourth-derivative stencil reaches the ghosts; its first
// and last rows read (7, -4, 1)/dx^4). All three operators are Toeplitz
// pentadiagonal applies plus a diagonal correction at the two end rows, which
// is how apply_* routes them through the shared penta kernel.
struct DiscreteOperators {
  double dx = 0.01;
  int m = 99; // interior dimension

  // D1: antisymmetric central first derivative, (-1, 0, 1)/(2 dx)
  double d1_c = 0.0; // 1/(2 dx)
  // D2: (1, -2, 1)/dx^2, symmetric negative definite
  double d2_c = 0.0; // 1/dx^2
  // D4: (1, -4, 6, -4, 1)/dx^4 with +1/dx^4 mirror correction at both end
  // rows, symmetric positive definite
  double d4_c = 0.0; // 1/dx^4

  void apply_d1(const double* u, double* out) const;
  void apply_d2(const double* u, double* out) const;
  void apply_d4(const double* u, double* out) const;

  // Discrete L^2 inner product (trapezoid rule; uniform interior weight dx).
  double ip(const double* a, const double* b) const;

  // ||u_x||^2_h in the forward-difference form, equal to -(u, D2 u)_h
  // identically.
  double grad_norm_sq(const double* u) const;

  // (u, D4 u)_h in the factored positive form dx (c_0^2/2 + sum c_i^2 +
  // c_N^2/2) over nodal curvatures c_i = (u_{i+1} - 2 u_i + u_{i-1})/dx^2
  // with the clamped ghost closure; algebraically identical to applying D4
  // and contracting, but each term is a short difference of O(u) values, so
  // the result carries ~eps relative error instead of the eps/dx^4 absolute
  // noise of the stencil route. Energy diagnostics need that headroom: the
  // identity residual divides energy differences by the sample spacing.
  double bend_quad(const double* u) const;

  // A = cI*I + c4*D4 + c2*D2 + c1*D1 assembled in band storage (kl = ku = 2),
  // mirror corrections included. Used to build Newton and steady-state
  // systems.
  void fill_banded(BandedMatrix& a, double ci, double c4, double c2,
                   double c1) const;
};

DiscreteOperators build_operators(const Mesh& mesh);

// (b - b0 ||u_x||^2_h) * D2 u
void berger_force(const double* u, double b, double b0,
                  const DiscreteOperators& ops, double* out);

// Smallest eigenvalue of D4 by inverse power iteration with Rayleigh
// quotient; used by the eigenfrequency convergence oracle.
double smallest_d4_eigenvalue(const DiscreteOperators& ops);

// Root of cos(beta) cosh(beta) = 1 in [4, 5.5] by bisection: the first
// clamped-clamped beam wavenumber, an oracle independent of the operators.
double clamped_beam_beta1();

} // namespace pbeam
