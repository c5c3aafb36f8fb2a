#include "pbeam/kernels.hpp"

#if PBEAM_HAVE_AVX2

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace pbeam {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline __m256d abs_pd(__m256d v) {
  const __m256d mask = _mm256_set1_pd(-0.0);
  return _mm256_andnot_pd(mask, v);
}

void penta_apply_avx2(const double* u, double* out, std::size_t m,
                      double cmm, double cm, double c0, double cp,
                      double cpp) {
  if (m < 8) {
    scalar_kernels().penta_apply(u, out, m, cmm, cm, c0, cp, cpp);
    return;
  }
  out[0] = c0 * u[0] + cp * u[1] + cpp * u[2];
  out[1] = cm * u[0] + c0 * u[1] + cp * u[2] + cpp * u[3];
  const __m256d vmm = _mm256_set1_pd(cmm);
  const __m256d vm = _mm256_set1_pd(cm);
  const __m256d v0 = _mm256_set1_pd(c0);
  const __m256d vp = _mm256_set1_pd(cp);
  const __m256d vpp = _mm256_set1_pd(cpp);
  std::size_t i = 2;
  for (; i + 4 + 2 <= m; i += 4) {
    __m256d acc = _mm256_mul_pd(vmm, _mm256_loadu_pd(u + i - 2));
    acc = _mm256_fmadd_pd(vm, _mm256_loadu_pd(u + i - 1), acc);
    acc = _mm256_fmadd_pd(v0, _mm256_loadu_pd(u + i), acc);
    acc = _mm256_fmadd_pd(vp, _mm256_loadu_pd(u + i + 1), acc);
    acc = _mm256_fmadd_pd(vpp, _mm256_loadu_pd(u + i + 2), acc);
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i + 2 < m; ++i)
    out[i] = cmm * u[i - 2] + cm * u[i - 1] + c0 * u[i] + cp * u[i + 1] +
             cpp * u[i + 2];
  out[m - 2] = cmm * u[m - 4] + cm * u[m - 3] + c0 * u[m - 2] + cp * u[m - 1];
  out[m - 1] = cmm * u[m - 3] + cm * u[m - 2] + c0 * u[m - 1];
}

double dot_avx2(const double* a, const double* b, std::size_t m) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < m; ++i) s += a[i] * b[i];
  return s;
}

double diff_sq_sum_avx2(const double* u, std::size_t m) {
  if (m == 0) return 0.0;
  double s = u[0] * u[0] + u[m - 1] * u[m - 1];
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 1;
  for (; i + 4 <= m; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(u + i - 1));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  s += hsum(acc);
  for (; i < m; ++i) {
    const double d = u[i] - u[i - 1];
    s += d * d;
  }
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t m) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m256d r =
        _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < m; ++i) y[i] += a * x[i];
}

void waxpy_avx2(double* w, double a, const double* x, const double* y,
                std::size_t m) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m256d r =
        _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(w + i, r);
  }
  for (; i < m; ++i) w[i] = a * x[i] + y[i];
}

double wrms_avx2(const double* e, const double* a, const double* b,
                 double atol, double rtol, std::size_t m) {
  if (m == 0) return 0.0;
  const __m256d vatol = _mm256_set1_pd(atol);
  const __m256d vrtol = _mm256_set1_pd(rtol);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m256d sc = _mm256_fmadd_pd(
        vrtol,
        _mm256_max_pd(abs_pd(_mm256_loadu_pd(a + i)),
                      abs_pd(_mm256_loadu_pd(b + i))),
        vatol);
    const __m256d q = _mm256_div_pd(_mm256_loadu_pd(e + i), sc);
    acc = _mm256_fmadd_pd(q, q, acc);
  }
  double s = hsum(acc);
  for (; i < m; ++i) {
    const double sc = atol + rtol * std::max(std::fabs(a[i]), std::fabs(b[i]));
    const double q = e[i] / sc;
    s += q * q;
  }
  return std::sqrt(s / static_cast<double>(m));
}

} // namespace

const Kernels& avx2_kernels() {
  static const Kernels k = {penta_apply_avx2, dot_avx2, diff_sq_sum_avx2,
                            axpy_avx2,        waxpy_avx2, wrms_avx2,
                            "avx2"};
  return k;
}

} // namespace pbeam

#endif // PBEAM_HAVE_AVX2
