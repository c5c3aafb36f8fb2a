#pragma once
#include <cstddef>
#include <vector>

namespace pbeam {

// Square banded matrix with kl sub- and ku superdiagonals, stored LAPACK-style
// with kl extra rows reserved for pivoting fill-in: entry (i, j) lives at
// ab[(kl + ku + i - j) + j*ld]. Small fixed bandwidths only (the beam
// operators have kl = ku = 2), so no effort is spent on blocking.
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku);

  int n() const { return n_; }
  int kl() const { return kl_; }
  int ku() const { return ku_; }

  bool in_band(int i, int j) const {
    return i >= 0 && j >= 0 && i < n_ && j < n_ && i - j <= kl_ &&
           j - i <= ku_;
  }
  double& at(int i, int j) { return ab_[idx(i, j)]; }
  double at(int i, int j) const { return ab_[idx(i, j)]; }

  void clear();

  // y = A x
  void multiply(const double* x, double* y) const;

 private:
  friend class BandedLU;
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(kl_ + ku_ + i - j) +
           static_cast<std::size_t>(j) * static_cast<std::size_t>(ld_);
  }
  int n_, kl_, ku_, ld_;
  std::vector<double> ab_;
};

// LU factorization with partial pivoting of a banded matrix.
class BandedLU {
 public:
  BandedLU() : lu_(0, 0, 0) {}

  // Factors a copy of A; throws std::runtime_error on exact singularity.
  void factor(const BandedMatrix& a);

  bool factored() const { return ok_; }

  // In-place solve A x = b (b overwritten by x).
  void solve(double* x) const;

 private:
  BandedMatrix lu_;
  std::vector<int> piv_;
  bool ok_ = false;
};

// Solve (A + alpha z z^T) x = rhs via Sherman-Morrison given a factorization
// of A. Two banded solves. Returns false when the update is singular
// (1 + alpha z^T A^{-1} z == 0).
bool solve_rank1_update(const BandedLU& lu, double alpha, const double* z,
                        const double* rhs, double* x, std::size_t m);

} // namespace pbeam
