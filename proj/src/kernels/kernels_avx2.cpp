#include "baryflow/kernels/simd.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace baryflow::kernels {

namespace {

// Vector exp on 4 doubles: Cephes-style range reduction against ln2
// split in two parts, a 2/3 Pade tail and exponent reassembly. About
// 1-2 ulp, which the equivalence tests against std::exp pin down.
inline __m256d exp4(__m256d x) {
  const __m256d hi = _mm256_set1_pd(709.436);
  const __m256d lo = _mm256_set1_pd(-708.396);
  const __m256d too_big = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
  const __m256d too_small = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d fx =
      _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(6.93145751953125e-1), x);
  x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(1.42860682030941723212e-6), x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d px = _mm256_set1_pd(1.26177193074810590878e-4);
  px = _mm256_fmadd_pd(px, xx, _mm256_set1_pd(3.02994407707441961300e-2));
  px = _mm256_fmadd_pd(px, xx, _mm256_set1_pd(9.99999999999999999910e-1));
  px = _mm256_mul_pd(px, x);
  __m256d qx = _mm256_set1_pd(3.00198505138664455042e-6);
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.52448340349684104192e-3));
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.27265548208155028766e-1));
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.0));
  const __m256d ratio = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  __m256d res = _mm256_fmadd_pd(ratio, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(fx);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  res = _mm256_mul_pd(res, _mm256_castsi256_pd(n64));

  res = _mm256_blendv_pd(res, _mm256_set1_pd(std::numeric_limits<double>::infinity()), too_big);
  res = _mm256_blendv_pd(res, _mm256_setzero_pd(), too_small);
  return res;
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(s, _mm_unpackhi_pd(s, s)));
}

void sqdist_avx2(const double* X, int n, const double* YT, int m, int d, double* D) {
  const int m4 = m & ~3;
  for (int i = 0; i < n; ++i) {
    const double* x = X + static_cast<long>(i) * d;
    double* row = D + static_cast<long>(i) * m;
    for (int j = 0; j < m4; j += 4) _mm256_storeu_pd(row + j, _mm256_setzero_pd());
    for (int j = m4; j < m; ++j) row[j] = 0.0;
    for (int c = 0; c < d; ++c) {
      const __m256d xc = _mm256_set1_pd(x[c]);
      const double* yr = YT + static_cast<long>(c) * m;
      for (int j = 0; j < m4; j += 4) {
        const __m256d diff = _mm256_sub_pd(xc, _mm256_loadu_pd(yr + j));
        _mm256_storeu_pd(row + j, _mm256_fmadd_pd(diff, diff, _mm256_loadu_pd(row + j)));
      }
      for (int j = m4; j < m; ++j) {
        const double diff = x[c] - yr[j];
        row[j] += diff * diff;
      }
    }
  }
}

void row_update_avx2(const double* C, int n, int m, const double* g, double eps, double* out) {
  const int m4 = m & ~3;
  const __m256d inv_eps = _mm256_set1_pd(1.0 / eps);
  for (int i = 0; i < n; ++i) {
    const double* row = C + static_cast<long>(i) * m;
    __m256d mxv = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    for (int j = 0; j < m4; j += 4)
      mxv = _mm256_max_pd(mxv, _mm256_sub_pd(_mm256_loadu_pd(g + j), _mm256_loadu_pd(row + j)));
    double mx = hmax(mxv);
    for (int j = m4; j < m; ++j) mx = std::max(mx, g[j] - row[j]);

    const __m256d mxs = _mm256_set1_pd(mx);
    __m256d acc = _mm256_setzero_pd();
    for (int j = 0; j < m4; j += 4) {
      const __m256d t = _mm256_sub_pd(
          _mm256_sub_pd(_mm256_loadu_pd(g + j), _mm256_loadu_pd(row + j)), mxs);
      acc = _mm256_add_pd(acc, exp4(_mm256_mul_pd(t, inv_eps)));
    }
    double s = hsum(acc);
    for (int j = m4; j < m; ++j) s += std::exp((g[j] - row[j] - mx) / eps);
    out[i] = -mx - eps * std::log(s);
  }
}

void row_sums_avx2(const double* C, int n, int m, const double* f, const double* g, double eps,
                   double* rows) {
  const int m4 = m & ~3;
  const __m256d inv_eps = _mm256_set1_pd(1.0 / eps);
  for (int i = 0; i < n; ++i) {
    const double* row = C + static_cast<long>(i) * m;
    const __m256d fi = _mm256_set1_pd(f[i]);
    __m256d acc = _mm256_setzero_pd();
    for (int j = 0; j < m4; j += 4) {
      const __m256d t = _mm256_sub_pd(_mm256_add_pd(fi, _mm256_loadu_pd(g + j)),
                                      _mm256_loadu_pd(row + j));
      acc = _mm256_add_pd(acc, exp4(_mm256_mul_pd(t, inv_eps)));
    }
    double s = hsum(acc);
    for (int j = m4; j < m; ++j) s += std::exp((f[i] + g[j] - row[j]) / eps);
    rows[i] = s;
  }
}

double cost_avx2(const double* C, int n, int m, const double* f, const double* g, double eps) {
  const int m4 = m & ~3;
  const __m256d inv_eps = _mm256_set1_pd(1.0 / eps);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* row = C + static_cast<long>(i) * m;
    const __m256d fi = _mm256_set1_pd(f[i]);
    __m256d acc = _mm256_setzero_pd();
    for (int j = 0; j < m4; j += 4) {
      const __m256d cv = _mm256_loadu_pd(row + j);
      const __m256d t = _mm256_sub_pd(_mm256_add_pd(fi, _mm256_loadu_pd(g + j)), cv);
      acc = _mm256_fmadd_pd(exp4(_mm256_mul_pd(t, inv_eps)), cv, acc);
    }
    double s = hsum(acc);
    for (int j = m4; j < m; ++j) s += std::exp((f[i] + g[j] - row[j]) / eps) * row[j];
    total += s;
  }
  return total;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable t{"avx2", sqdist_avx2, row_update_avx2, row_sums_avx2, cost_avx2};
  return &t;
}

}  // namespace baryflow::kernels

#else

namespace baryflow::kernels {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace baryflow::kernels

#endif
