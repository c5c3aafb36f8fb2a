#include "pbeam/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace pbeam {
namespace {

void penta_apply_scalar(const double* u, double* out, std::size_t m,
                        double cmm, double cm, double c0, double cp,
                        double cpp) {
  if (m == 0) return;
  if (m < 5) {
    // Degenerate widths: do it by definition.
    for (std::size_t i = 0; i < m; ++i) {
      double acc = c0 * u[i];
      if (i >= 1) acc += cm * u[i - 1];
      if (i >= 2) acc += cmm * u[i - 2];
      if (i + 1 < m) acc += cp * u[i + 1];
      if (i + 2 < m) acc += cpp * u[i + 2];
      out[i] = acc;
    }
    return;
  }
  out[0] = c0 * u[0] + cp * u[1] + cpp * u[2];
  out[1] = cm * u[0] + c0 * u[1] + cp * u[2] + cpp * u[3];
  for (std::size_t i = 2; i + 2 < m; ++i)
    out[i] = cmm * u[i - 2] + cm * u[i - 1] + c0 * u[i] + cp * u[i + 1] +
             cpp * u[i + 2];
  out[m - 2] = cmm * u[m - 4] + cm * u[m - 3] + c0 * u[m - 2] + cp * u[m - 1];
  out[m - 1] = cmm * u[m - 3] + cm * u[m - 2] + c0 * u[m - 1];
}

double dot_scalar(const double* a, const double* b, std::size_t m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) acc += a[i] * b[i];
  return acc;
}

double diff_sq_sum_scalar(const double* u, std::size_t m) {
  if (m == 0) return 0.0;
  double acc = u[0] * u[0];
  for (std::size_t i = 1; i < m; ++i) {
    const double d = u[i] - u[i - 1];
    acc += d * d;
  }
  acc += u[m - 1] * u[m - 1];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t m) {
  for (std::size_t i = 0; i < m; ++i) y[i] += a * x[i];
}

void waxpy_scalar(double* w, double a, const double* x, const double* y,
                  std::size_t m) {
  for (std::size_t i = 0; i < m; ++i) w[i] = a * x[i] + y[i];
}

double wrms_scalar(const double* e, const double* a, const double* b,
                   double atol, double rtol, std::size_t m) {
  if (m == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double sc = atol + rtol * std::max(std::fabs(a[i]), std::fabs(b[i]));
    const double q = e[i] / sc;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(m));
}

} // namespace

const Kernels& scalar_kernels() {
  static const Kernels k = {penta_apply_scalar, dot_scalar,
                            diff_sq_sum_scalar, axpy_scalar,
                            waxpy_scalar,       wrms_scalar,
                            "scalar"};
  return k;
}

} // namespace pbeam
