#pragma once

namespace baryflow::kernels {

// Hot inner loops behind one dispatch table. All matrices are row-major
// raw buffers. YT in pairwise_sqdist is the second point set transposed
// (d x m) so the inner j loop runs over contiguous memory.
struct KernelTable {
  const char* name;

  // D[i*m + j] = squared euclidean distance between X row i and YT col j.
  void (*pairwise_sqdist)(const double* X, int n, const double* YT, int m, int d, double* D);

  // out[i] = -eps * log sum_j exp((g[j] - C[i*m + j]) / eps), max-shifted.
  void (*sinkhorn_row_update)(const double* C, int n, int m, const double* g, double eps,
                              double* out);

  // rows[i] = sum_j exp((f[i] + g[j] - C[i*m + j]) / eps)
  void (*plan_row_sums)(const double* C, int n, int m, const double* f, const double* g,
                        double eps, double* rows);

  // sum_ij exp((f[i] + g[j] - C[i*m + j]) / eps) * C[i*m + j]
  double (*plan_cost)(const double* C, int n, int m, const double* f, const double* g,
                      double eps);
};

const KernelTable& scalar_kernels();
const KernelTable* avx2_kernels();  // null when not compiled in or unsupported by the CPU
const KernelTable* neon_kernels();

// Picks the widest available implementation once per process. The
// BARYFLOW_SIMD environment variable (scalar|avx2|neon) overrides the
// choice; an unavailable request falls back to scalar with a warning.
const KernelTable& active_kernels();

}  // namespace baryflow::kernels
