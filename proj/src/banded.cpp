#include "pbeam/banded.hpp"

#include "pbeam/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pbeam {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ld_(2 * kl + ku + 1),
      ab_(static_cast<std::size_t>(ld_) * static_cast<std::size_t>(n > 0 ? n : 0),
          0.0) {}

void BandedMatrix::clear() { std::fill(ab_.begin(), ab_.end(), 0.0); }

void BandedMatrix::multiply(const double* x, double* y) const {
  for (int i = 0; i < n_; ++i) {
    double acc = 0.0;
    const int j0 = std::max(0, i - kl_);
    const int j1 = std::min(n_ - 1, i + ku_);
    for (int j = j0; j <= j1; ++j) acc += at(i, j) * x[j];
    y[i] = acc;
  }
}

void BandedLU::factor(const BandedMatrix& a) {
  lu_ = a;
  const int n = lu_.n_, kl = lu_.kl_, ku = lu_.ku_;
  piv_.assign(static_cast<std::size_t>(n), 0);
  ok_ = false;
  // Fill-in can extend the upper bandwidth to ku + kl.
  const int kuw = ku + kl;
  for (int j = 0; j < n; ++j) {
    const int imax = std::min(n - 1, j + kl);
    int p = j;
    double pmax = std::fabs(lu_.at(j, j));
    for (int i = j + 1; i <= imax; ++i) {
      const double v = std::fabs(lu_.at(i, j));
      if (v > pmax) {
        pmax = v;
        p = i;
      }
    }
    if (pmax == 0.0) throw std::runtime_error("banded LU: singular matrix");
    piv_[static_cast<std::size_t>(j)] = p;
    const int cmax = std::min(n - 1, j + kuw);
    if (p != j)
      for (int c = j; c <= cmax; ++c) {
        // Row p entries beyond its own band are guaranteed zero-filled.
        std::swap(lu_.ab_[lu_.idx(j, c)], lu_.ab_[lu_.idx(p, c)]);
      }
    const double d = lu_.at(j, j);
    for (int i = j + 1; i <= imax; ++i) {
      const double l = lu_.at(i, j) / d;
      lu_.at(i, j) = l;
      if (l != 0.0)
        for (int c = j + 1; c <= cmax; ++c) lu_.at(i, c) -= l * lu_.at(j, c);
    }
  }
  ok_ = true;
}

void BandedLU::solve(double* x) const {
  const int n = lu_.n_, kl = lu_.kl_, ku = lu_.ku_;
  const int kuw = ku + kl;
  // Forward: apply pivots and L (unit diagonal, multipliers stored in band).
  for (int j = 0; j < n; ++j) {
    const int p = piv_[static_cast<std::size_t>(j)];
    if (p != j) std::swap(x[j], x[p]);
    const int imax = std::min(n - 1, j + kl);
    const double xj = x[j];
    for (int i = j + 1; i <= imax; ++i) x[i] -= lu_.at(i, j) * xj;
  }
  // Backward: U x = y.
  for (int i = n - 1; i >= 0; --i) {
    double acc = x[i];
    const int j1 = std::min(n - 1, i + kuw);
    for (int j = i + 1; j <= j1; ++j) acc -= lu_.at(i, j) * x[j];
    x[i] = acc / lu_.at(i, i);
  }
}

bool solve_rank1_update(const BandedLU& lu, double alpha, const double* z,
                        const double* rhs, double* x, std::size_t m) {
  const Kernels& k = kernels();
  std::vector<double> az(z, z + m);
  std::copy(rhs, rhs + m, x);
  lu.solve(x);      // x = A^{-1} rhs
  lu.solve(az.data()); // az = A^{-1} z
  const double denom = 1.0 + alpha * k.dot(z, az.data(), m);
  if (denom == 0.0 || !std::isfinite(denom)) return false;
  const double scale = alpha * k.dot(z, x, m) / denom;
  k.axpy(-scale, az.data(), x, m);
  return true;
}

} // namespace pbeam
