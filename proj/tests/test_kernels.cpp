#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "baryflow/kernels/simd.hpp"
#include "baryflow/rng.hpp"

using baryflow::Rng;
using namespace baryflow::kernels;

namespace {

struct Problem {
  int n, m, d;
  std::vector<double> X, YT, C, f, g;
};

Problem make_problem(Rng& rng, int n, int m, int d) {
  Problem p{n, m, d, {}, {}, {}, {}, {}};
  p.X.resize(static_cast<size_t>(n) * d);
  p.YT.resize(static_cast<size_t>(m) * d);
  for (double& v : p.X) v = rng.normal();
  for (double& v : p.YT) v = rng.normal() * 1.3 + 0.4;
  p.C.resize(static_cast<size_t>(n) * m);
  scalar_kernels().pairwise_sqdist(p.X.data(), n, p.YT.data(), m, d, p.C.data());
  p.f.resize(n);
  p.g.resize(m);
  for (double& v : p.f) v = rng.normal() * 0.1;
  for (double& v : p.g) v = rng.normal() * 0.1;
  return p;
}

}  // namespace

TEST_CASE("scalar squared distances match a naive loop") {
  Rng rng(81);
  const Problem p = make_problem(rng, 5, 7, 3);
  for (int i = 0; i < p.n; ++i) {
    for (int j = 0; j < p.m; ++j) {
      double s = 0.0;
      for (int c = 0; c < p.d; ++c) {
        const double diff = p.X[static_cast<size_t>(i) * p.d + c] -
                            p.YT[static_cast<size_t>(c) * p.m + j];
        s += diff * diff;
      }
      CHECK(p.C[static_cast<size_t>(i) * p.m + j] == doctest::Approx(s).epsilon(1e-13));
    }
  }
}

TEST_CASE("scalar row update matches a naive logsumexp") {
  Rng rng(82);
  const Problem p = make_problem(rng, 4, 9, 2);
  const double eps = 0.05;
  std::vector<double> out(p.n);
  scalar_kernels().sinkhorn_row_update(p.C.data(), p.n, p.m, p.g.data(), eps, out.data());
  for (int i = 0; i < p.n; ++i) {
    double mx = -1e300;
    for (int j = 0; j < p.m; ++j)
      mx = std::max(mx, (p.g[j] - p.C[static_cast<size_t>(i) * p.m + j]) / eps);
    double s = 0.0;
    for (int j = 0; j < p.m; ++j)
      s += std::exp((p.g[j] - p.C[static_cast<size_t>(i) * p.m + j]) / eps - mx);
    const double ref = -eps * (mx + std::log(s));
    CHECK(out[i] == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("tiny eps does not overflow the row update") {
  Rng rng(83);
  const Problem p = make_problem(rng, 3, 5, 2);
  std::vector<double> out(p.n);
  scalar_kernels().sinkhorn_row_update(p.C.data(), p.n, p.m, p.g.data(), 1e-6, out.data());
  for (double v : out) CHECK(std::isfinite(v));
}

TEST_CASE("active table is one of the known implementations") {
  const std::string name = active_kernels().name;
  CHECK((name == "scalar" || name == "avx2" || name == "neon"));
}

TEST_CASE("vector kernels agree with scalar on awkward sizes") {
  const KernelTable* vec = avx2_kernels();
  if (!vec) vec = neon_kernels();
  if (!vec) return;  // nothing vectorized on this machine

  Rng rng(84);
  for (int rep = 0; rep < 20; ++rep) {
    // Sizes straddle the vector width, including 1 and primes.
    const int n = 1 + rng.next_int(9);
    const int m = 1 + rng.next_int(13);
    const int d = 1 + rng.next_int(5);
    const Problem p = make_problem(rng, n, m, d);
    const double eps = 0.02 + 0.3 * rng.next_double();

    std::vector<double> Ds(static_cast<size_t>(n) * m), Dv(Ds.size());
    scalar_kernels().pairwise_sqdist(p.X.data(), n, p.YT.data(), m, d, Ds.data());
    vec->pairwise_sqdist(p.X.data(), n, p.YT.data(), m, d, Dv.data());
    for (size_t i = 0; i < Ds.size(); ++i)
      CHECK(Dv[i] == doctest::Approx(Ds[i]).epsilon(1e-12));

    std::vector<double> rs(n), rv(n);
    scalar_kernels().sinkhorn_row_update(p.C.data(), n, m, p.g.data(), eps, rs.data());
    vec->sinkhorn_row_update(p.C.data(), n, m, p.g.data(), eps, rv.data());
    for (int i = 0; i < n; ++i)
      CHECK(std::abs(rv[i] - rs[i]) < 1e-11 * (1.0 + std::abs(rs[i])));

    std::vector<double> ss(n), sv(n);
    scalar_kernels().plan_row_sums(p.C.data(), n, m, p.f.data(), p.g.data(), eps, ss.data());
    vec->plan_row_sums(p.C.data(), n, m, p.f.data(), p.g.data(), eps, sv.data());
    for (int i = 0; i < n; ++i) CHECK(sv[i] == doctest::Approx(ss[i]).epsilon(1e-9));

    const double cs = scalar_kernels().plan_cost(p.C.data(), n, m, p.f.data(), p.g.data(), eps);
    const double cv = vec->plan_cost(p.C.data(), n, m, p.f.data(), p.g.data(), eps);
    CHECK(cv == doctest::Approx(cs).epsilon(1e-9));
  }
}

TEST_CASE("vectorized exponential stays accurate across the argument range") {
  const KernelTable* vec = avx2_kernels();
  if (!vec) vec = neon_kernels();
  if (!vec) return;

  // Exercise the row update with arguments spanning many magnitudes; the
  // result is eps * logsumexp, so any exp inaccuracy shows up directly.
  for (double eps : {1e-4, 1e-2, 1.0, 50.0}) {
    const int m = 11;
    std::vector<double> C(m), g(m, 0.0);
    for (int j = 0; j < m; ++j) C[j] = std::pow(10.0, j - 5);
    double rs, rv;
    scalar_kernels().sinkhorn_row_update(C.data(), 1, m, g.data(), eps, &rs);
    vec->sinkhorn_row_update(C.data(), 1, m, g.data(), eps, &rv);
    CHECK(std::abs(rv - rs) < 1e-11 * (1.0 + std::abs(rs)));
  }
}
