#include "baryflow/kernels/simd.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <limits>

namespace baryflow::kernels {

namespace {

// Same range reduction and Pade tail as the AVX2 variant, two lanes wide.
inline float64x2_t exp2d(float64x2_t x) {
  const float64x2_t hi = vdupq_n_f64(709.436);
  const float64x2_t lo = vdupq_n_f64(-708.396);
  const uint64x2_t too_big = vcgtq_f64(x, hi);
  const uint64x2_t too_small = vcltq_f64(x, lo);
  x = vminq_f64(vmaxq_f64(x, lo), hi);

  const float64x2_t fx = vrndnq_f64(vmulq_n_f64(x, 1.4426950408889634074));
  x = vfmsq_f64(x, fx, vdupq_n_f64(6.93145751953125e-1));
  x = vfmsq_f64(x, fx, vdupq_n_f64(1.42860682030941723212e-6));

  const float64x2_t xx = vmulq_f64(x, x);
  float64x2_t px = vdupq_n_f64(1.26177193074810590878e-4);
  px = vfmaq_f64(vdupq_n_f64(3.02994407707441961300e-2), px, xx);
  px = vfmaq_f64(vdupq_n_f64(9.99999999999999999910e-1), px, xx);
  px = vmulq_f64(px, x);
  float64x2_t qx = vdupq_n_f64(3.00198505138664455042e-6);
  qx = vfmaq_f64(vdupq_n_f64(2.52448340349684104192e-3), qx, xx);
  qx = vfmaq_f64(vdupq_n_f64(2.27265548208155028766e-1), qx, xx);
  qx = vfmaq_f64(vdupq_n_f64(2.0), qx, xx);
  const float64x2_t ratio = vdivq_f64(px, vsubq_f64(qx, px));
  float64x2_t res = vfmaq_f64(vdupq_n_f64(1.0), ratio, vdupq_n_f64(2.0));

  int64x2_t n64 = vcvtq_s64_f64(fx);
  n64 = vshlq_n_s64(vaddq_s64(n64, vdupq_n_s64(1023)), 52);
  res = vmulq_f64(res, vreinterpretq_f64_s64(n64));

  res = vbslq_f64(too_big, vdupq_n_f64(std::numeric_limits<double>::infinity()), res);
  res = vbslq_f64(too_small, vdupq_n_f64(0.0), res);
  return res;
}

inline double hsum(float64x2_t v) { return vaddvq_f64(v); }
inline double hmax(float64x2_t v) { return vmaxvq_f64(v); }

void sqdist_neon(const double* X, int n, const double* YT, int m, int d, double* D) {
  const int m2 = m & ~1;
  for (int i = 0; i < n; ++i) {
    const double* x = X + static_cast<long>(i) * d;
    double* row = D + static_cast<long>(i) * m;
    for (int j = 0; j < m; ++j) row[j] = 0.0;
    for (int c = 0; c < d; ++c) {
      const float64x2_t xc = vdupq_n_f64(x[c]);
      const double* yr = YT + static_cast<long>(c) * m;
      for (int j = 0; j < m2; j += 2) {
        const float64x2_t diff = vsubq_f64(xc, vld1q_f64(yr + j));
        vst1q_f64(row + j, vfmaq_f64(vld1q_f64(row + j), diff, diff));
      }
      for (int j = m2; j < m; ++j) {
        const double diff = x[c] - yr[j];
        row[j] += diff * diff;
      }
    }
  }
}

void row_update_neon(const double* C, int n, int m, const double* g, double eps, double* out) {
  const int m2 = m & ~1;
  const double inv_eps = 1.0 / eps;
  for (int i = 0; i < n; ++i) {
    const double* row = C + static_cast<long>(i) * m;
    float64x2_t mxv = vdupq_n_f64(-std::numeric_limits<double>::infinity());
    for (int j = 0; j < m2; j += 2)
      mxv = vmaxq_f64(mxv, vsubq_f64(vld1q_f64(g + j), vld1q_f64(row + j)));
    double mx = hmax(mxv);
    for (int j = m2; j < m; ++j) mx = std::max(mx, g[j] - row[j]);

    const float64x2_t mxs = vdupq_n_f64(mx);
    float64x2_t acc = vdupq_n_f64(0.0);
    for (int j = 0; j < m2; j += 2) {
      const float64x2_t t =
          vsubq_f64(vsubq_f64(vld1q_f64(g + j), vld1q_f64(row + j)), mxs);
      acc = vaddq_f64(acc, exp2d(vmulq_n_f64(t, inv_eps)));
    }
    double s = hsum(acc);
    for (int j = m2; j < m; ++j) s += std::exp((g[j] - row[j] - mx) * inv_eps);
    out[i] = -mx - eps * std::log(s);
  }
}

void row_sums_neon(const double* C, int n, int m, const double* f, const double* g, double eps,
                   double* rows) {
  const int m2 = m & ~1;
  const double inv_eps = 1.0 / eps;
  for (int i = 0; i < n; ++i) {
    const double* row = C + static_cast<long>(i) * m;
    const float64x2_t fi = vdupq_n_f64(f[i]);
    float64x2_t acc = vdupq_n_f64(0.0);
    for (int j = 0; j < m2; j += 2) {
      const float64x2_t t =
          vsubq_f64(vaddq_f64(fi, vld1q_f64(g + j)), vld1q_f64(row + j));
      acc = vaddq_f64(acc, exp2d(vmulq_n_f64(t, inv_eps)));
    }
    double s = hsum(acc);
    for (int j = m2; j < m; ++j) s += std::exp((f[i] + g[j] - row[j]) * inv_eps);
    rows[i] = s;
  }
}

double cost_neon(const double* C, int n, int m, const double* f, const double* g, double eps) {
  const int m2 = m & ~1;
  const double inv_eps = 1.0 / eps;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* row = C + static_cast<long>(i) * m;
    const float64x2_t fi = vdupq_n_f64(f[i]);
    float64x2_t acc = vdupq_n_f64(0.0);
    for (int j = 0; j < m2; j += 2) {
      const float64x2_t cv = vld1q_f64(row + j);
      const float64x2_t t = vsubq_f64(vaddq_f64(fi, vld1q_f64(g + j)), cv);
      acc = vfmaq_f64(acc, exp2d(vmulq_n_f64(t, inv_eps)), cv);
    }
    double s = hsum(acc);
    for (int j = m2; j < m; ++j) s += std::exp((f[i] + g[j] - row[j]) * inv_eps) * row[j];
    total += s;
  }
  return total;
}

}  // namespace

const KernelTable* neon_kernels() {
  static const KernelTable t{"neon", sqdist_neon, row_update_neon, row_sums_neon, cost_neon};
  return &t;
}

}  // namespace baryflow::kernels

#else

namespace baryflow::kernels {
const KernelTable* neon_kernels() { return nullptr; }
}  // namespace baryflow::kernels

#endif
