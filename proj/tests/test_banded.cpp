#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pbeam/banded.hpp"

using namespace pbeam;

namespace {

struct Lcg {
  std::uint64_t s;
  explicit Lcg(std::uint64_t seed) : s(seed) {}
  double next() {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(s >> 11) / 9007199254740992.0 * 2.0 - 1.0;
  }
};

// Dense Gaussian elimination with partial pivoting, the reference solver.
std::vector<double> dense_solve(std::vector<std::vector<double>> a,
                                std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (int r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int j = c; j < n; ++j) a[r][j] -= f * a[c][j];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int r = n - 1; r >= 0; --r) {
    double s = b[static_cast<std::size_t>(r)];
    for (int j = r + 1; j < n; ++j) s -= a[r][j] * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(r)] = s / a[r][r];
  }
  return x;
}

// Random banded matrix, diagonally weighted enough to stay well-conditioned.
void fill_random(BandedMatrix& m, std::vector<std::vector<double>>& dense,
                 std::uint64_t seed, double diag_boost) {
  const int n = m.n();
  Lcg g(seed);
  m.clear();
  dense.assign(static_cast<std::size_t>(n),
               std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (m.in_band(i, j)) {
        double v = g.next() + (i == j ? diag_boost : 0.0);
        m.at(i, j) = v;
        dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
      }
}

} // namespace

TEST_CASE("multiply agrees with the dense product") {
  for (int n : {1, 2, 3, 5, 8, 50, 99}) {
    BandedMatrix m(n, 2, 2);
    std::vector<std::vector<double>> dense;
    fill_random(m, dense, 40 + static_cast<std::uint64_t>(n), 0.0);
    Lcg g(77);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = g.next();
    std::vector<double> y(static_cast<std::size_t>(n));
    m.multiply(x.data(), y.data());
    for (int i = 0; i < n; ++i) {
      double want = 0.0;
      for (int j = 0; j < n; ++j)
        want += dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                x[static_cast<std::size_t>(j)];
      CHECK(y[static_cast<std::size_t>(i)] ==
            doctest::Approx(want).epsilon(1e-13));
    }
  }
}

TEST_CASE("factor/solve agrees with dense elimination") {
  for (int n : {1, 2, 3, 5, 8, 50, 99}) {
    // diag_boost 0 exercises pivoting: off-band entries routinely dominate
    for (double boost : {0.0, 4.0}) {
      BandedMatrix m(n, 2, 2);
      std::vector<std::vector<double>> dense;
      fill_random(m, dense, 1000 + static_cast<std::uint64_t>(n) +
                                static_cast<std::uint64_t>(boost),
                  boost);
      Lcg g(5);
      std::vector<double> b(static_cast<std::size_t>(n));
      for (auto& v : b) v = g.next();

      BandedLU lu;
      lu.factor(m);
      auto x = b;
      lu.solve(x.data());
      auto want = dense_solve(dense, b);
      for (int i = 0; i < n; ++i)
        CHECK(x[static_cast<std::size_t>(i)] ==
              doctest::Approx(want[static_cast<std::size_t>(i)])
                  .epsilon(1e-9)); // random matrices can be mildly conditioned
    }
  }
}

TEST_CASE("pivoting handles a zero leading diagonal") {
  BandedMatrix m(4, 2, 2);
  m.clear();
  // singular without row exchange: a00 = 0
  m.at(0, 0) = 0.0; m.at(0, 1) = 2.0;
  m.at(1, 0) = 1.0; m.at(1, 1) = 1.0; m.at(1, 2) = 1.0;
  m.at(2, 1) = 3.0; m.at(2, 2) = -1.0; m.at(2, 3) = 0.5;
  m.at(3, 2) = 1.0; m.at(3, 3) = 2.0;
  BandedLU lu;
  lu.factor(m);
  std::vector<double> b = {2.0, 3.0, 2.5, 3.0};
  auto x = b;
  lu.solve(x.data());
  std::vector<double> y(4);
  m.multiply(x.data(), y.data());
  for (int i = 0; i < 4; ++i)
    CHECK(y[static_cast<std::size_t>(i)] ==
          doctest::Approx(b[static_cast<std::size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("exactly singular matrices are rejected") {
  BandedMatrix m(3, 2, 2);
  m.clear(); // all zero
  BandedLU lu;
  CHECK_THROWS_AS(lu.factor(m), std::runtime_error);
  CHECK_FALSE(lu.factored());
}

TEST_CASE("rank-one update solve matches a dense solve of A + a z z^T") {
  for (int n : {3, 8, 50}) {
    BandedMatrix m(n, 2, 2);
    std::vector<std::vector<double>> dense;
    fill_random(m, dense, 9000 + static_cast<std::uint64_t>(n), 5.0);
    Lcg g(13);
    std::vector<double> z(static_cast<std::size_t>(n)),
        b(static_cast<std::size_t>(n));
    for (auto& v : z) v = g.next();
    for (auto& v : b) v = g.next();
    const double alpha = 0.9;

    auto full = dense;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        full[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
            alpha * z[static_cast<std::size_t>(i)] *
            z[static_cast<std::size_t>(j)];

    BandedLU lu;
    lu.factor(m);
    std::vector<double> x(static_cast<std::size_t>(n));
    REQUIRE(solve_rank1_update(lu, alpha, z.data(), b.data(), x.data(),
                               static_cast<std::size_t>(n)));
    auto want = dense_solve(full, b);
    for (int i = 0; i < n; ++i)
      CHECK(x[static_cast<std::size_t>(i)] ==
            doctest::Approx(want[static_cast<std::size_t>(i)]).epsilon(1e-9));
  }
}

TEST_CASE("rank-one update reports a singular denominator") {
  // A = I (n=1), z = 1, alpha = -1: 1 + alpha z^T A^-1 z = 0 exactly.
  BandedMatrix m(1, 2, 2);
  m.clear();
  m.at(0, 0) = 1.0;
  BandedLU lu;
  lu.factor(m);
  const double z = 1.0, b = 1.0;
  double x = 0.0;
  CHECK_FALSE(solve_rank1_update(lu, -1.0, &z, &b, &x, 1));
}
