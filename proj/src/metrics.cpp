#include "baryflow/metrics.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "baryflow/kernels/simd.hpp"

namespace baryflow {

namespace {

using kernels::KernelTable;

// Splits [0, n) across worker threads; serial when threads <= 1.
void parallel_rows(int n, int threads, const std::function<void(int, int)>& body) {
  if (threads <= 1 || n < 2 * threads) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(body, lo, hi);
  }
  for (auto& th : pool) th.join();
}

struct CostMatrices {
  std::vector<double> C;   // n x m row-major
  std::vector<double> CT;  // m x n row-major
  int n = 0, m = 0;
};

CostMatrices build_cost(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, int threads) {
  if (X.cols() != Y.cols()) throw DataError("point sets disagree on dimension");
  if (X.rows() == 0 || Y.rows() == 0) throw DataError("empty point set");
  const int n = static_cast<int>(X.rows()), m = static_cast<int>(Y.rows());
  const int d = static_cast<int>(X.cols());
  // Row-major copies; Y transposed so kernel inner loops stay contiguous.
  std::vector<double> Xr(static_cast<size_t>(n) * d), YT(static_cast<size_t>(m) * d);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) Xr[static_cast<size_t>(i) * d + c] = X(i, c);
  for (int j = 0; j < m; ++j)
    for (int c = 0; c < d; ++c) YT[static_cast<size_t>(c) * m + j] = Y(j, c);

  const KernelTable& K = kernels::active_kernels();
  CostMatrices out;
  out.n = n;
  out.m = m;
  out.C.resize(static_cast<size_t>(n) * m);
  parallel_rows(n, threads, [&](int lo, int hi) {
    K.pairwise_sqdist(Xr.data() + static_cast<size_t>(lo) * d, hi - lo, YT.data(), m, d,
                      out.C.data() + static_cast<size_t>(lo) * m);
  });
  out.CT.resize(static_cast<size_t>(m) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out.CT[static_cast<size_t>(j) * n + i] = out.C[static_cast<size_t>(i) * m + j];
  return out;
}

struct Potentials {
  std::vector<double> fa, gb;  // absorbed: fa = f + eps log a, gb = g + eps log b
};

SinkhornResult run_sinkhorn(const CostMatrices& cm, const SinkhornConfig& cfg, Potentials* out) {
  if (!(cfg.eps > 0.0)) throw ConfigError("sinkhorn eps must be positive");
  if (cfg.max_iter < 1) throw ConfigError("sinkhorn max_iter must be at least 1");
  const int n = cm.n, m = cm.m;
  const double loga = -std::log(static_cast<double>(n));
  const double logb = -std::log(static_cast<double>(m));
  std::vector<double> fa(n, cfg.eps * loga), gb(m, cfg.eps * logb);
  std::vector<double> rows(n);
  const KernelTable& K = kernels::active_kernels();

  SinkhornResult res;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    parallel_rows(n, cfg.threads, [&](int lo, int hi) {
      K.sinkhorn_row_update(cm.C.data() + static_cast<size_t>(lo) * m, hi - lo, m, gb.data(),
                            cfg.eps, fa.data() + lo);
    });
    for (int i = 0; i < n; ++i) fa[i] += cfg.eps * loga;
    parallel_rows(m, cfg.threads, [&](int lo, int hi) {
      K.sinkhorn_row_update(cm.CT.data() + static_cast<size_t>(lo) * n, hi - lo, n, fa.data(),
                            cfg.eps, gb.data() + lo);
    });
    for (int j = 0; j < m; ++j) gb[j] += cfg.eps * logb;

    parallel_rows(n, cfg.threads, [&](int lo, int hi) {
      K.plan_row_sums(cm.C.data() + static_cast<size_t>(lo) * m, hi - lo, m, fa.data() + lo,
                      gb.data(), cfg.eps, rows.data() + lo);
    });
    double resid = 0.0;
    const double a = 1.0 / n;
    for (int i = 0; i < n; ++i) resid += std::abs(rows[i] - a);
    res.iterations = it;
    res.marginal_residual = resid;
    if (resid < cfg.marginal_tol) {
      res.converged = true;
      break;
    }
  }
  res.cost = K.plan_cost(cm.C.data(), n, m, fa.data(), gb.data(), cfg.eps);
  if (out) *out = Potentials{std::move(fa), std::move(gb)};
  return res;
}

}  // namespace

SinkhornResult sinkhorn_wd(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                           const SinkhornConfig& cfg) {
  const CostMatrices cm = build_cost(X, Y, cfg.threads);
  return run_sinkhorn(cm, cfg, nullptr);
}

Eigen::MatrixXd sinkhorn_plan(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                              const SinkhornConfig& cfg) {
  const CostMatrices cm = build_cost(X, Y, cfg.threads);
  Potentials pot;
  run_sinkhorn(cm, cfg, &pot);
  Eigen::MatrixXd P(cm.n, cm.m);
  for (int i = 0; i < cm.n; ++i)
    for (int j = 0; j < cm.m; ++j)
      P(i, j) = std::exp((pot.fa[i] + pot.gb[j] - cm.C[static_cast<size_t>(i) * cm.m + j]) /
                         cfg.eps);
  return P;
}

double transportation_cost(const LabeledDataset& data, const FlowModel& model,
                           const WeightVector& w) {
  data.validate(1);
  if (data.k() != model.k()) throw DataError("dataset and model class counts disagree");
  if (w.size() != data.k()) throw DataError("weight count does not match class count");
  double total = 0.0;
  for (int j = 0; j < data.k(); ++j) {
    const Eigen::MatrixXd& X = data.classes[j].data;
    const Eigen::MatrixXd Y = transform(model, j, X);
    total += w[j] * (X - Y).rowwise().squaredNorm().mean();
  }
  return total;
}

double pairwise_flip_wd(const LabeledDataset& data, const FlowModel& model,
                        const SinkhornConfig& cfg) {
  data.validate(2);
  if (data.k() != model.k()) throw DataError("dataset and model class counts disagree");
  double total = 0.0;
  int pairs = 0;
  for (int from = 0; from < data.k(); ++from) {
    for (int to = 0; to < data.k(); ++to) {
      if (from == to) continue;
      const Eigen::MatrixXd flipped = flip(model, from, to, data.classes[from].data);
      total += sinkhorn_wd(data.classes[to].data, flipped, cfg).cost;
      ++pairs;
    }
  }
  return total / pairs;
}

std::vector<TracePoint> convergence_trace(const LabeledDataset& train,
                                          const LabeledDataset& test, const WeightVector& w,
                                          const std::vector<LayerConfig>& schedule,
                                          std::uint64_t seed, const SinkhornConfig& cfg,
                                          FlowModel* out_model) {
  using clock = std::chrono::steady_clock;
  std::vector<TracePoint> trace;

  FlowModel empty;
  empty.dim = static_cast<int>(train.dim());
  empty.weights = w;
  empty.seed = seed;
  for (const auto& c : train.classes) empty.labels.push_back(c.class_id);
  trace.push_back(
      TracePoint{0, pairwise_flip_wd(test, empty, cfg), transportation_cost(test, empty, w), 0.0});

  const auto start = clock::now();
  double metric_ms = 0.0;
  FlowModel model =
      fit_flow(train, w, schedule, seed, [&](int done, const FlowModel& partial) {
        const auto m0 = clock::now();
        const double fit_ms =
            std::chrono::duration<double, std::milli>(m0 - start).count() - metric_ms;
        trace.push_back(TracePoint{done, pairwise_flip_wd(test, partial, cfg),
                                   transportation_cost(test, partial, w), fit_ms});
        metric_ms += std::chrono::duration<double, std::milli>(clock::now() - m0).count();
      });
  if (out_model) *out_model = std::move(model);
  return trace;
}

double gaussian_w2_sq(const GaussianParams& a, const GaussianParams& b) {
  const Eigen::MatrixXd Sa = matrix_sqrt_psd(a.cov);
  const Eigen::MatrixXd cross = matrix_sqrt_psd(Sa * b.cov * Sa);
  return (a.mean - b.mean).squaredNorm() + (a.cov + b.cov - 2.0 * cross).trace();
}

}  // namespace baryflow
