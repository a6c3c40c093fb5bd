#pragma once

#include <memory>
#include <vector>

#include "baryflow/map.hpp"
#include "baryflow/rng.hpp"
#include "baryflow/types.hpp"
#include "baryflow/univariate.hpp"

namespace baryflow {

enum class FrameSource { mswd, random, identity };

// Classes subsampled to a common size, ready for sliced comparisons.
struct SlicedProblem {
  std::vector<Eigen::MatrixXd> X;  // k blocks, n_common x d
  WeightVector w;

  Eigen::Index dim() const { return X.empty() ? 0 : X.front().cols(); }
  Eigen::Index n() const { return X.empty() ? 0 : X.front().rows(); }
};

// Sliced transport discrepancy of the classes to their sliced barycenter
// along the m orthonormal columns of Q:
//   V(Q) = ( (1/m) sum_l sum_j w_j (1/n) sum_i |(X_j q_l)_(i) - y_(i),l|^p )^(1/p)
// where y_(i),l = sum_j w_j (X_j q_l)_(i) pairs order statistics.
double mswd_objective(const SlicedProblem& prob, const Eigen::MatrixXd& Q, double p);

// Gradient of the objective in the ambient d x m coordinates, holding the
// sort permutations fixed (valid a.e.; ties contribute subgradients).
Eigen::MatrixXd mswd_gradient(const SlicedProblem& prob, const Eigen::MatrixXd& Q, double p);

// Nearest orthonormal frame: the polar factor of M via thin SVD.
Eigen::MatrixXd polar_frame(const Eigen::MatrixXd& M);

// Orthonormal d x m frame from a Gaussian matrix via QR, with the R
// diagonal sign-normalized so the draw is canonical.
Eigen::MatrixXd random_frame(int d, int m, Rng& rng);

struct MswdConfig {
  double p = 2.0;
  int max_iter = 50;
  double step0 = 1.0;
  double shrink = 0.5;
  int max_backtracks = 20;
  double tol = 1e-6;  // stop when the relative objective increase drops below this
};

struct MswdTrace {
  std::vector<Eigen::MatrixXd> frames;  // every accepted iterate, initial included
  std::vector<double> values;
};

// Projected gradient ascent on the Stiefel manifold with backtracking;
// every iterate is re-projected so feasibility never drifts.
Eigen::MatrixXd find_mswd_frame(const SlicedProblem& prob, int m, const MswdConfig& cfg,
                                Rng& rng, MswdTrace* trace = nullptr);

// Transport step along a shared frame: each class moves its projections
// onto the per-direction barycenters and keeps the orthogonal complement
//   forward(x) = x + Q (t(Q^T x) - Q^T x).
class NbLayerMap final : public InvertibleMap {
 public:
  NbLayerMap(std::shared_ptr<const Eigen::MatrixXd> Q, std::vector<Monge1D> dirs);

  int dim() const override { return static_cast<int>(Q_->rows()); }
  void apply_forward(Eigen::Ref<Eigen::MatrixXd> pts) const override;
  void apply_inverse(Eigen::Ref<Eigen::MatrixXd> pts) const override;
  const char* kind() const override { return "nb"; }

  const Eigen::MatrixXd& frame() const { return *Q_; }
  std::shared_ptr<const Eigen::MatrixXd> frame_ptr() const { return Q_; }
  const std::vector<Monge1D>& directions() const { return dirs_; }

 private:
  std::shared_ptr<const Eigen::MatrixXd> Q_;
  std::vector<Monge1D> dirs_;
};

struct NbLayerConfig {
  FrameSource frame = FrameSource::mswd;
  int m = 0;  // 0 means the ambient dimension
  UnivariateFitConfig fit;
  MswdConfig opt;
};

// Fits one layer: choose the frame, fit per-direction class densities,
// form their barycenters and hand every class its Monge maps. rng seeds
// the frame draw and the subsampling for the frame search.
std::vector<std::shared_ptr<const InvertibleMap>> fit_nb_layer(const LabeledDataset& data,
                                                               const WeightVector& w,
                                                               const NbLayerConfig& cfg,
                                                               const Rng& rng);

}  // namespace baryflow
