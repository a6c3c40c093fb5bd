#include "baryflow/tree_layer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "baryflow/normal.hpp"

namespace baryflow {

namespace {

constexpr double kCubeClip = 1e-12;

double clip_cube(double v) { return std::clamp(v, kCubeClip, 1.0 - kCubeClip); }

struct Box {
  std::vector<std::pair<double, double>> sides;
  double volume() const {
    double v = 1.0;
    for (const auto& [lo, hi] : sides) v *= hi - lo;
    return v;
  }
};

struct SplitCandidate {
  double decrease = 0.0;
  int node_id = -1;
  int dim = -1;
  double threshold = 0.0;
};

// Larger decrease wins; equal decreases go to the earlier node.
struct CandidateOrder {
  bool operator()(const SplitCandidate& a, const SplitCandidate& b) const {
    if (a.decrease != b.decrease) return a.decrease < b.decrease;
    return a.node_id > b.node_id;
  }
};

// n - sum_c n_c^2 / n; the pooled Gini impurity scaled by the node size,
// so decreases are directly comparable across nodes.
double impurity(const std::vector<double>& counts, double n) {
  if (n <= 0.0) return 0.0;
  double s = 0.0;
  for (double c : counts) s += c * c;
  return n - s / n;
}

// Best split of one node by exhaustive midpoint scan, or nullopt.
std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& pooled,
                                         const std::vector<int>& labels, int num_classes,
                                         const std::vector<int>& idx, int node_id,
                                         double total_n, int min_leaf) {
  const int n = static_cast<int>(idx.size());
  const int d = static_cast<int>(pooled.cols());
  std::vector<double> parent_counts(num_classes, 0.0);
  for (int i : idx) parent_counts[labels[i]] += 1.0;
  const double imp_parent = impurity(parent_counts, n);

  std::optional<SplitCandidate> best;
  std::vector<int> order(idx);
  std::vector<double> left_counts(num_classes);
  for (int s = 0; s < d; ++s) {
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return pooled(a, s) < pooled(b, s); });
    std::fill(left_counts.begin(), left_counts.end(), 0.0);
    for (int i = 0; i < n - 1; ++i) {
      left_counts[labels[order[i]]] += 1.0;
      const double a = pooled(order[i], s), b = pooled(order[i + 1], s);
      if (!(a < b)) continue;
      const int nl = i + 1, nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      double imp_l = impurity(left_counts, nl);
      std::vector<double> right_counts(num_classes);
      for (int c = 0; c < num_classes; ++c) right_counts[c] = parent_counts[c] - left_counts[c];
      const double dec = (imp_parent - imp_l - impurity(right_counts, nr)) / total_n;
      if (dec <= 0.0) continue;
      const double thr = 0.5 * (a + b);
      if (!best || dec > best->decrease ||
          (dec == best->decrease &&
           (s < best->dim || (s == best->dim && thr < best->threshold)))) {
        best = SplitCandidate{dec, node_id, s, thr};
      }
    }
  }
  return best;
}

}  // namespace

int SharedTree::leaf_count() const {
  int c = 0;
  for (size_t v = 0; v < nodes.size(); ++v)
    if (is_leaf(static_cast<int>(v))) ++c;
  return c;
}

std::vector<int> SharedTree::leaf_ids() const {
  std::vector<int> ids;
  for (size_t v = 0; v < nodes.size(); ++v)
    if (is_leaf(static_cast<int>(v))) ids.push_back(static_cast<int>(v));
  return ids;
}

int SharedTree::leaf_of(const Eigen::RowVectorXd& x) const {
  int v = 0;
  while (!is_leaf(v)) v = x[nodes[v].split_dim] <= nodes[v].threshold ? nodes[v].left : nodes[v].right;
  return v;
}

SharedTree fit_shared_tree(const Eigen::MatrixXd& pooled, const std::vector<int>& labels,
                           int num_classes, const TreeFitConfig& cfg) {
  const int n = static_cast<int>(pooled.rows());
  const int d = static_cast<int>(pooled.cols());
  if (n == 0 || d == 0) throw DataError("tree fitting needs non-empty samples");
  if (static_cast<int>(labels.size()) != n) throw DataError("one label per pooled sample required");
  if (cfg.max_leaf_nodes < 1) throw ConfigError("max_leaf_nodes must be at least 1");
  if (cfg.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be at least 1");
  for (int i = 0; i < n; ++i)
    if (labels[i] < 0 || labels[i] >= num_classes) throw DataError("label out of range");
  if (pooled.minCoeff() < 0.0 || pooled.maxCoeff() > 1.0)
    throw DataError("tree fitting expects samples inside the unit cube");

  SharedTree tree;
  tree.dim = d;
  tree.nodes.push_back(TreeNode{});

  std::vector<std::vector<int>> node_idx(1);
  node_idx[0].resize(n);
  std::iota(node_idx[0].begin(), node_idx[0].end(), 0);
  std::vector<Box> boxes(1);
  boxes[0].sides.assign(d, {0.0, 1.0});
  tree.nodes[0].volume = 1.0;

  std::priority_queue<SplitCandidate, std::vector<SplitCandidate>, CandidateOrder> heap;
  if (auto c = best_split(pooled, labels, num_classes, node_idx[0], 0, n, cfg.min_samples_leaf))
    heap.push(*c);

  int leaves = 1;
  while (leaves < cfg.max_leaf_nodes && !heap.empty()) {
    const SplitCandidate cand = heap.top();
    heap.pop();
    const int v = cand.node_id;
    // Move out before push_back below invalidates references into node_idx.
    const std::vector<int> idx = std::move(node_idx[v]);

    const int l = static_cast<int>(tree.nodes.size());
    const int r = l + 1;
    tree.nodes[v].left = l;
    tree.nodes[v].right = r;
    tree.nodes[v].split_dim = cand.dim;
    tree.nodes[v].threshold = cand.threshold;
    tree.nodes[v].lo = boxes[v].sides[cand.dim].first;
    tree.nodes[v].hi = boxes[v].sides[cand.dim].second;

    Box bl = boxes[v], br = boxes[v];
    bl.sides[cand.dim].second = cand.threshold;
    br.sides[cand.dim].first = cand.threshold;
    tree.nodes.push_back(TreeNode{});
    tree.nodes.push_back(TreeNode{});
    tree.nodes[l].volume = bl.volume();
    tree.nodes[r].volume = br.volume();
    boxes.push_back(bl);
    boxes.push_back(br);

    std::vector<int> li, ri;
    for (int i : idx) (pooled(i, cand.dim) <= cand.threshold ? li : ri).push_back(i);
    node_idx.push_back(std::move(li));
    node_idx.push_back(std::move(ri));
    ++leaves;

    if (auto c = best_split(pooled, labels, num_classes, node_idx[l], l, n, cfg.min_samples_leaf))
      heap.push(*c);
    if (auto c = best_split(pooled, labels, num_classes, node_idx[r], r, n, cfg.min_samples_leaf))
      heap.push(*c);
  }
  return tree;
}

Eigen::MatrixXd estimate_leaf_densities(const SharedTree& tree,
                                        const std::vector<Eigen::MatrixXd>& class_points,
                                        double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw ConfigError("kappa must lie in (0, 1]");
  const auto leaves = tree.leaf_ids();
  std::vector<int> leaf_col(tree.nodes.size(), -1);
  for (size_t c = 0; c < leaves.size(); ++c) leaf_col[leaves[c]] = static_cast<int>(c);

  Eigen::MatrixXd out(static_cast<Eigen::Index>(class_points.size()),
                      static_cast<Eigen::Index>(leaves.size()));
  for (size_t j = 0; j < class_points.size(); ++j) {
    const auto& X = class_points[j];
    if (X.cols() != tree.dim) throw DataError("class dimension does not match the tree");
    if (X.rows() == 0) throw DataError("class has no samples");
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(leaves.size()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) counts[leaf_col[tree.leaf_of(X.row(i))]] += 1.0;
    for (size_t c = 0; c < leaves.size(); ++c) {
      const double vol = tree.nodes[leaves[c]].volume;
      out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) =
          (1.0 - kappa) * counts[static_cast<Eigen::Index>(c)] / (X.rows() * vol) + kappa;
    }
  }
  return out;
}

TreeMongeMap::TreeMongeMap(std::shared_ptr<const SharedTree> tree,
                           std::shared_ptr<const NodeMaps> maps, bool gauss_pre)
    : tree_(std::move(tree)), maps_(std::move(maps)), gauss_pre_(gauss_pre) {
  if (!tree_ || !maps_ || maps_->size() != tree_->nodes.size())
    throw DataError("tree map needs one entry per tree node");
}

void TreeMongeMap::forward_one(Eigen::Ref<Eigen::RowVectorXd> x, std::vector<int>& path) const {
  // Deepest node first: each node map is an endomorphism of its own
  // interval, so the branch taken by the raw coordinate stays valid.
  path.clear();
  int v = 0;
  while (!tree_->is_leaf(v)) {
    path.push_back(v);
    const auto& nd = tree_->nodes[v];
    v = x[nd.split_dim] <= nd.threshold ? nd.left : nd.right;
  }
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    const auto& nd = tree_->nodes[*it];
    x[nd.split_dim] = (*maps_)[*it]->forward(x[nd.split_dim]);
  }
}

void TreeMongeMap::inverse_one(Eigen::Ref<Eigen::RowVectorXd> x) const {
  int v = 0;
  while (!tree_->is_leaf(v)) {
    const auto& nd = tree_->nodes[v];
    x[nd.split_dim] = (*maps_)[v]->inverse(x[nd.split_dim]);
    v = x[nd.split_dim] <= nd.threshold ? nd.left : nd.right;
  }
}

void TreeMongeMap::apply_forward(Eigen::Ref<Eigen::MatrixXd> pts) const {
  std::vector<int> path;
  path.reserve(tree_->nodes.size());
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    Eigen::RowVectorXd x = pts.row(i);
    if (gauss_pre_)
      for (Eigen::Index s = 0; s < x.size(); ++s) x[s] = clip_cube(norm_cdf(x[s]));
    forward_one(x, path);
    if (gauss_pre_)
      for (Eigen::Index s = 0; s < x.size(); ++s) x[s] = norm_quantile(clip_cube(x[s]));
    pts.row(i) = x;
  }
}

void TreeMongeMap::apply_inverse(Eigen::Ref<Eigen::MatrixXd> pts) const {
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    Eigen::RowVectorXd x = pts.row(i);
    if (gauss_pre_)
      for (Eigen::Index s = 0; s < x.size(); ++s) x[s] = clip_cube(norm_cdf(x[s]));
    inverse_one(x);
    if (gauss_pre_)
      for (Eigen::Index s = 0; s < x.size(); ++s) x[s] = norm_quantile(clip_cube(x[s]));
    pts.row(i) = x;
  }
}

std::vector<std::shared_ptr<const TreeMongeMap>> fit_tree_monge(
    std::shared_ptr<const SharedTree> tree, const Eigen::MatrixXd& leaf_c,
    const WeightVector& w, TreeNodeWeighting weighting, bool gauss_pre) {
  const int k = static_cast<int>(leaf_c.rows());
  if (w.size() != k) throw DataError("weight count does not match class count");
  const auto leaves = tree->leaf_ids();
  if (leaf_c.cols() != static_cast<Eigen::Index>(leaves.size()))
    throw DataError("leaf density shape does not match the tree");

  // Subtree masses per class; children were created after their parent,
  // so a reverse scan sees both children before the parent.
  const int nn = static_cast<int>(tree->nodes.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(k, nn);
  std::vector<int> leaf_col(nn, -1);
  for (size_t c = 0; c < leaves.size(); ++c) leaf_col[leaves[c]] = static_cast<int>(c);
  for (int v = nn - 1; v >= 0; --v) {
    if (tree->is_leaf(v)) {
      P.col(v) = leaf_c.col(leaf_col[v]) * tree->nodes[v].volume;
    } else {
      P.col(v) = P.col(tree->nodes[v].left) + P.col(tree->nodes[v].right);
    }
  }
  for (int j = 0; j < k; ++j)
    if (!(P(j, 0) > 0.0))
      throw NumericError("class " + std::to_string(j) +
                         " has zero tree mass; use kappa > 0");

  std::vector<std::shared_ptr<TreeMongeMap::NodeMaps>> per_class(k);
  for (int j = 0; j < k; ++j)
    per_class[j] = std::make_shared<TreeMongeMap::NodeMaps>(nn);

  for (int v = 0; v < nn; ++v) {
    if (tree->is_leaf(v)) continue;
    const auto& nd = tree->nodes[v];
    std::vector<Histogram1D> hists;
    std::vector<double> raw(k);
    hists.reserve(k);
    for (int j = 0; j < k; ++j) {
      const double ml = P(j, nd.left), mr = P(j, nd.right);
      if (!(ml > 0.0 && mr > 0.0))
        throw NumericError("zero class mass at a tree node; use kappa > 0");
      const double tot = ml + mr;
      hists.emplace_back(std::vector<double>{nd.lo, nd.threshold, nd.hi},
                         std::vector<double>{ml / tot / (nd.threshold - nd.lo),
                                             mr / tot / (nd.hi - nd.threshold)});
      raw[j] = (weighting == TreeNodeWeighting::class_weighted ? w[j] : 1.0) * P(j, v);
    }
    const double raw_sum = std::accumulate(raw.begin(), raw.end(), 0.0);
    for (double& x : raw) x /= raw_sum;
    const WeightVector omega(raw);
    const QuantileFunction bary = barycenter_quantile(hists, omega);
    for (int j = 0; j < k; ++j) (*per_class[j])[v] = hist_monge_map(hists[j], bary);
  }

  std::vector<std::shared_ptr<const TreeMongeMap>> maps;
  maps.reserve(k);
  for (int j = 0; j < k; ++j)
    maps.push_back(std::make_shared<TreeMongeMap>(tree, per_class[j], gauss_pre));
  return maps;
}

std::vector<std::shared_ptr<const InvertibleMap>> fit_tree_layer(const LabeledDataset& data,
                                                                 const WeightVector& w,
                                                                 const TreeLayerConfig& cfg) {
  data.validate(1);
  if (w.size() != data.k()) throw DataError("weight count does not match class count");
  const int d = static_cast<int>(data.dim());

  std::vector<Eigen::MatrixXd> cube;
  cube.reserve(data.classes.size());
  for (const auto& c : data.classes) {
    if (cfg.unit_interval) {
      if (c.data.minCoeff() < 0.0 || c.data.maxCoeff() > 1.0)
        throw DataError("unit_interval tree layer expects data inside [0,1]^d");
      cube.push_back(c.data);
    } else {
      Eigen::MatrixXd U = c.data;
      for (Eigen::Index i = 0; i < U.rows(); ++i)
        for (Eigen::Index s = 0; s < U.cols(); ++s) U(i, s) = clip_cube(norm_cdf(U(i, s)));
      cube.push_back(std::move(U));
    }
  }

  Eigen::Index total = 0;
  for (const auto& X : cube) total += X.rows();
  Eigen::MatrixXd pooled(total, d);
  std::vector<int> labels(static_cast<size_t>(total));
  Eigen::Index at = 0;
  for (size_t j = 0; j < cube.size(); ++j) {
    pooled.middleRows(at, cube[j].rows()) = cube[j];
    std::fill(labels.begin() + at, labels.begin() + at + cube[j].rows(), static_cast<int>(j));
    at += cube[j].rows();
  }

  auto tree = std::make_shared<const SharedTree>(
      fit_shared_tree(pooled, labels, data.k(), cfg.fit));
  const Eigen::MatrixXd leaf_c = estimate_leaf_densities(*tree, cube, cfg.kappa);
  auto typed = fit_tree_monge(tree, leaf_c, w, cfg.node_weights, !cfg.unit_interval);
  return {typed.begin(), typed.end()};
}

}  // namespace baryflow
