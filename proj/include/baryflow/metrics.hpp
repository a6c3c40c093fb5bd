#pragma once

#include <vector>

#include "baryflow/flow.hpp"
#include "baryflow/gaussian_layer.hpp"
#include "baryflow/types.hpp"

namespace baryflow {

struct SinkhornConfig {
  double eps = 0.1;
  int max_iter = 100;
  double marginal_tol = 1e-9;  // L1 deviation of the row marginals
  int threads = 1;
};

struct SinkhornResult {
  double cost = 0.0;  // <P, C> for the entropic plan, no entropy term
  int iterations = 0;
  double marginal_residual = 0.0;
  bool converged = false;
};

// Entropic OT between uniform empirical measures under squared euclidean
// cost, iterated in the log domain with absorbed potentials so small eps
// cannot overflow. One iteration is a row and a column update; columns
// are updated last, so column marginals are exact and the residual is
// measured on the rows.
SinkhornResult sinkhorn_wd(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                           const SinkhornConfig& cfg = {});

// Materialized transport plan, for tests and small problems only.
Eigen::MatrixXd sinkhorn_plan(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                              const SinkhornConfig& cfg = {});

// sum_j w_j / n_j sum_i ||x_i - T_j(x_i)||^2 for the composed maps.
double transportation_cost(const LabeledDataset& data, const FlowModel& model,
                           const WeightVector& w);

// Mean Sinkhorn cost between flipped samples and the target class's own
// samples over all k^2 - k ordered pairs.
double pairwise_flip_wd(const LabeledDataset& data, const FlowModel& model,
                        const SinkhornConfig& cfg = {});

struct TracePoint {
  int layer = 0;
  double wd = 0.0;
  double tc = 0.0;
  double fit_ms = 0.0;  // cumulative fitting time, metric time excluded
};

// Fits the schedule while measuring wd/tc on held-out data after every
// layer; entry 0 is the untransformed baseline.
std::vector<TracePoint> convergence_trace(const LabeledDataset& train,
                                          const LabeledDataset& test, const WeightVector& w,
                                          const std::vector<LayerConfig>& schedule,
                                          std::uint64_t seed, const SinkhornConfig& cfg = {},
                                          FlowModel* out_model = nullptr);

// Closed-form squared 2-Wasserstein distance between Gaussians.
double gaussian_w2_sq(const GaussianParams& a, const GaussianParams& b);

}  // namespace baryflow
