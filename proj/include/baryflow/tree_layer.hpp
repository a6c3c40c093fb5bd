#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "baryflow/histogram.hpp"
#include "baryflow/map.hpp"
#include "baryflow/types.hpp"

namespace baryflow {

struct TreeNode {
  int left = -1, right = -1;  // -1 on both marks a leaf
  int split_dim = -1;
  double threshold = 0.0;
  double lo = 0.0, hi = 1.0;  // node extent along split_dim
  double volume = 1.0;        // box volume inside the unit cube
};

// One axis-aligned partition of [0,1]^d shared by every class.
struct SharedTree {
  int dim = 0;
  std::vector<TreeNode> nodes;  // node 0 is the root

  bool is_leaf(int v) const { return nodes[v].left < 0; }
  int leaf_count() const;
  std::vector<int> leaf_ids() const;  // ascending node id
  int leaf_of(const Eigen::RowVectorXd& x) const;
};

struct TreeFitConfig {
  int max_leaf_nodes = 10;
  int min_samples_leaf = 1;
};

// Best-first CART growth on the pooled samples: repeatedly split the leaf
// whose best split gives the largest pooled Gini decrease. Candidate
// thresholds are midpoints of consecutive distinct values; ties resolve to
// the lowest dimension, then the lowest threshold. Splits with zero
// decrease are never taken, so identical classes yield a single leaf.
SharedTree fit_shared_tree(const Eigen::MatrixXd& pooled, const std::vector<int>& labels,
                           int num_classes, const TreeFitConfig& cfg);

// Per-class leaf densities with uniform smoothing:
//   c_{j,leaf} = (1 - kappa) n_{j,leaf} / (n_j vol) + kappa.
// Rows are classes, columns follow SharedTree::leaf_ids(). Every entry is
// strictly positive for kappa > 0, so each class mass is positive in
// every subtree.
Eigen::MatrixXd estimate_leaf_densities(const SharedTree& tree,
                                        const std::vector<Eigen::MatrixXd>& class_points,
                                        double kappa);

enum class TreeNodeWeighting {
  class_weighted,  // omega_j proportional to w_j P_j(node)
  node_mass,       // omega_j proportional to P_j(node)
};

// Monge maps for one class: a piecewise-linear map per internal node,
// transporting the node's two-bin conditional (left/right mass) onto the
// node barycenter. Applied deepest-first so every node map stays an
// endomorphism of its own interval.
class TreeMongeMap final : public InvertibleMap {
 public:
  using NodeMaps = std::vector<std::optional<PiecewiseLinearMap>>;

  TreeMongeMap(std::shared_ptr<const SharedTree> tree, std::shared_ptr<const NodeMaps> maps,
               bool gauss_pre);

  int dim() const override { return tree_->dim; }
  void apply_forward(Eigen::Ref<Eigen::MatrixXd> pts) const override;
  void apply_inverse(Eigen::Ref<Eigen::MatrixXd> pts) const override;
  const char* kind() const override { return "tree"; }

  const SharedTree& tree() const { return *tree_; }
  std::shared_ptr<const SharedTree> tree_ptr() const { return tree_; }
  const NodeMaps& node_maps() const { return *maps_; }
  bool gauss_pre() const { return gauss_pre_; }

 private:
  void forward_one(Eigen::Ref<Eigen::RowVectorXd> x, std::vector<int>& path) const;
  void inverse_one(Eigen::Ref<Eigen::RowVectorXd> x) const;

  std::shared_ptr<const SharedTree> tree_;
  std::shared_ptr<const NodeMaps> maps_;
  bool gauss_pre_;
};

// Builds the per-node two-bin transport for every class from the leaf
// densities. leaf_c is the matrix from estimate_leaf_densities.
std::vector<std::shared_ptr<const TreeMongeMap>> fit_tree_monge(
    std::shared_ptr<const SharedTree> tree, const Eigen::MatrixXd& leaf_c,
    const WeightVector& w, TreeNodeWeighting weighting, bool gauss_pre);

struct TreeLayerConfig {
  TreeFitConfig fit;
  double kappa = 0.9;
  bool unit_interval = false;  // skip the normal CDF pre/post processors
  TreeNodeWeighting node_weights = TreeNodeWeighting::class_weighted;
};

std::vector<std::shared_ptr<const InvertibleMap>> fit_tree_layer(const LabeledDataset& data,
                                                                 const WeightVector& w,
                                                                 const TreeLayerConfig& cfg);

}  // namespace baryflow
