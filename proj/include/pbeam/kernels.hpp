#pragma once
#include <cstddef>

namespace pbeam {

// Low-level array kernels over contiguous double buffers. Two backends share
// this table: a portable scalar reference and an AVX2+FMA variant. The hot
// paths of the integrator (stencil applies, inner products, error norms) all
// route through it, so the backends must agree to rounding-level tolerance;
// the equivalence tests pin that down.
struct Kernels {
  // out[i] = cmm*u[i-2] + cm*u[i-1] + c0*u[i] + cp*u[i+1] + cpp*u[i+2],
  // reading zero outside [0, m). Boundary closures (ghost-point mirrors)
  // are the caller's business: they are rank-two corrections on top of this.
  void (*penta_apply)(const double* u, double* out, std::size_t m,
                      double cmm, double cm, double c0, double cp, double cpp);

  double (*dot)(const double* a, const double* b, std::size_t m);

  // u[0]^2 + sum_{i=1..m-1} (u[i]-u[i-1])^2 + u[m-1]^2
  // (squared forward differences of u extended by zero at both ends)
  double (*diff_sq_sum)(const double* u, std::size_t m);

  // y += a*x
  void (*axpy)(double a, const double* x, double* y, std::size_t m);

  // w = a*x + y  (w may alias x or y)
  void (*waxpy)(double* w, double a, const double* x, const double* y,
                std::size_t m);

  // sqrt( (1/m) * sum ( e[i] / (atol + rtol*max(|a[i]|,|b[i]|)) )^2 )
  double (*wrms)(const double* e, const double* a, const double* b,
                 double atol, double rtol, std::size_t m);

  const char* name;
};

// Scalar reference backend (always available).
const Kernels& scalar_kernels();

#if PBEAM_HAVE_AVX2
// AVX2+FMA backend; only call if the CPU supports it.
const Kernels& avx2_kernels();
#endif

// Backend chosen at first use: AVX2 when the CPU supports it, else scalar.
// Environment override PBEAM_KERNELS=scalar|avx2 (the latter ignored when
// unsupported) wins; useful for the equivalence tests and benchmarking.
const Kernels& kernels();

} // namespace pbeam
