#include <cmath>
#include <limits>

#include "baryflow/kernels/simd.hpp"

namespace baryflow::kernels {

namespace {

void sqdist_scalar(const double* X, int n, const double* YT, int m, int d, double* D) {
  for (int i = 0; i < n; ++i) {
    const double* x = X + static_cast<long>(i) * d;
    double* row = D + static_cast<long>(i) * m;
    for (int j = 0; j < m; ++j) row[j] = 0.0;
    for (int c = 0; c < d; ++c) {
      const double xc = x[c];
      const double* yr = YT + static_cast<long>(c) * m;
      for (int j = 0; j < m; ++j) {
        const double diff = xc - yr[j];
        row[j] += diff * diff;
      }
    }
  }
}

void row_update_scalar(const double* C, int n, int m, const double* g, double eps, double* out) {
  for (int i = 0; i < n; ++i) {
    const double* row = C + static_cast<long>(i) * m;
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) mx = std::max(mx, g[j] - row[j]);
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += std::exp((g[j] - row[j] - mx) / eps);
    out[i] = -mx - eps * std::log(s);
  }
}

void row_sums_scalar(const double* C, int n, int m, const double* f, const double* g, double eps,
                     double* rows) {
  for (int i = 0; i < n; ++i) {
    const double* row = C + static_cast<long>(i) * m;
    const double fi = f[i];
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += std::exp((fi + g[j] - row[j]) / eps);
    rows[i] = s;
  }
}

double cost_scalar(const double* C, int n, int m, const double* f, const double* g, double eps) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* row = C + static_cast<long>(i) * m;
    const double fi = f[i];
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += std::exp((fi + g[j] - row[j]) / eps) * row[j];
    total += s;
  }
  return total;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable t{"scalar", sqdist_scalar, row_update_scalar, row_sums_scalar,
                             cost_scalar};
  return t;
}

}  // namespace baryflow::kernels
