#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <vector>

#include "baryflow/rng.hpp"
#include "baryflow/tree_layer.hpp"

using namespace baryflow;

namespace {

// 1-d construction with one clean split: class 0 puts 8 of 10 points
// left of 0.5, class 1 mirrors it. The contaminants sit at the outer
// ends so every interior split scores below the 10-10 one, and the
// straddling pair (0.45, 0.55) puts the best threshold at exactly 0.5.
LabeledDataset split_at_half() {
  LabeledDataset data;
  Eigen::MatrixXd A(10, 1), B(10, 1);
  A << 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.94, 0.98;
  B << 0.02, 0.06, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90;
  data.classes.push_back({A, 0});
  data.classes.push_back({B, 1});
  return data;
}

std::vector<int> pooled_labels(const LabeledDataset& data) {
  std::vector<int> out;
  for (size_t j = 0; j < data.classes.size(); ++j)
    for (Eigen::Index i = 0; i < data.classes[j].data.rows(); ++i)
      out.push_back(static_cast<int>(j));
  return out;
}

Eigen::MatrixXd pool(const LabeledDataset& data) {
  Eigen::Index n = 0;
  for (const auto& c : data.classes) n += c.data.rows();
  Eigen::MatrixXd out(n, data.dim());
  Eigen::Index at = 0;
  for (const auto& c : data.classes) {
    out.middleRows(at, c.data.rows()) = c.data;
    at += c.data.rows();
  }
  return out;
}

}  // namespace

TEST_CASE("the straddle construction splits at one half") {
  const LabeledDataset data = split_at_half();
  TreeFitConfig cfg;
  cfg.max_leaf_nodes = 2;
  const SharedTree tree = fit_shared_tree(pool(data), pooled_labels(data), 2, cfg);
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.leaf_count() == 2);
  CHECK(tree.nodes[0].split_dim == 0);
  CHECK(tree.nodes[0].threshold == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tree.nodes[0].lo == 0.0);
  CHECK(tree.nodes[0].hi == 1.0);
  CHECK(tree.nodes[1].volume == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tree.nodes[2].volume == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("identical classes never split") {
  Eigen::MatrixXd X(20, 2);
  Rng rng(61);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (int s = 0; s < 2; ++s) X(i, s) = rng.next_double();
  LabeledDataset data;
  data.classes.push_back({X, 0});
  data.classes.push_back({X, 1});
  TreeFitConfig cfg;
  cfg.max_leaf_nodes = 8;
  const SharedTree tree = fit_shared_tree(pool(data), pooled_labels(data), 2, cfg);
  CHECK(tree.leaf_count() == 1);  // zero decrease is never accepted
}

TEST_CASE("tie between dimensions goes to the lower one") {
  // Duplicate the discriminating coordinate; both dims offer the same
  // decrease, dim 0 must win.
  Eigen::MatrixXd X(4, 2);
  X << 0.1, 0.1, 0.2, 0.2, 0.7, 0.7, 0.8, 0.8;
  const std::vector<int> labels{0, 0, 1, 1};
  TreeFitConfig cfg;
  cfg.max_leaf_nodes = 2;
  const SharedTree tree = fit_shared_tree(X, labels, 2, cfg);
  CHECK(tree.nodes[0].split_dim == 0);
  CHECK(tree.nodes[0].threshold == doctest::Approx(0.45).epsilon(1e-15));
}

TEST_CASE("min_samples_leaf blocks unbalanced splits") {
  Eigen::MatrixXd X(4, 1);
  X << 0.1, 0.6, 0.7, 0.8;
  const std::vector<int> labels{0, 1, 1, 1};
  TreeFitConfig cfg;
  cfg.max_leaf_nodes = 4;
  cfg.min_samples_leaf = 2;
  const SharedTree tree = fit_shared_tree(X, labels, 2, cfg);
  // The only class-separating split (at 0.35) leaves one sample on the
  // left, so it is forbidden; with classes mixed 2-2 any other split has
  // nonpositive decrease... the tree stays a stump or splits 2-2.
  for (size_t v = 0; v < tree.nodes.size(); ++v) {
    if (!tree.is_leaf(static_cast<int>(v))) {
      int n_left = 0;
      for (Eigen::Index i = 0; i < X.rows(); ++i)
        if (X(i, tree.nodes[v].split_dim) <= tree.nodes[v].threshold) ++n_left;
      CHECK(n_left >= 2);
      CHECK(X.rows() - n_left >= 2);
    }
  }
}

TEST_CASE("out of cube samples are rejected") {
  Eigen::MatrixXd X(2, 1);
  X << -0.1, 0.5;
  CHECK_THROWS_AS(fit_shared_tree(X, {0, 1}, 2, TreeFitConfig{}), DataError);
}

TEST_CASE("leaf densities follow the smoothing formula") {
  const LabeledDataset data = split_at_half();
  TreeFitConfig cfg;
  cfg.max_leaf_nodes = 2;
  const SharedTree tree = fit_shared_tree(pool(data), pooled_labels(data), 2, cfg);
  const double kappa = 0.25;
  const Eigen::MatrixXd c = estimate_leaf_densities(
      tree, {data.classes[0].data, data.classes[1].data}, kappa);
  REQUIRE(c.rows() == 2);
  REQUIRE(c.cols() == 2);
  // Class 0: 8/10 mass in the left leaf of volume 0.5.
  CHECK(c(0, 0) == doctest::Approx(0.75 * 0.8 / 0.5 + 0.25).epsilon(1e-14));
  CHECK(c(0, 1) == doctest::Approx(0.75 * 0.2 / 0.5 + 0.25).epsilon(1e-14));
  CHECK(c(1, 0) == doctest::Approx(0.75 * 0.2 / 0.5 + 0.25).epsilon(1e-14));
  CHECK(c(1, 1) == doctest::Approx(0.75 * 0.8 / 0.5 + 0.25).epsilon(1e-14));
  CHECK_THROWS_AS(estimate_leaf_densities(tree, {data.classes[0].data}, 0.0), ConfigError);
  CHECK_THROWS_AS(estimate_leaf_densities(tree, {data.classes[0].data}, 1.5), ConfigError);
}

TEST_CASE("one split maps match the histogram barycenter transport") {
  // With vanishing smoothing the left/right class densities are 1.6/0.4
  // against 0.4/1.6; their barycenter quantile is 0.625 u + 0.1875 on the
  // middle levels, so the class 0 map sends 0.25 to q(0.4) = 0.4375.
  const LabeledDataset data = split_at_half();
  TreeLayerConfig cfg;
  cfg.fit.max_leaf_nodes = 2;
  cfg.kappa = 1e-8;
  cfg.unit_interval = true;
  const auto maps = fit_tree_layer(data, WeightVector::uniform(2), cfg);
  REQUIRE(maps.size() == 2);

  Eigen::MatrixXd x(1, 1);
  x(0, 0) = 0.25;
  maps[0]->apply_forward(x);
  CHECK(x(0, 0) == doctest::Approx(0.4375).epsilon(1e-6));
  x(0, 0) = 0.75;
  maps[1]->apply_forward(x);
  CHECK(x(0, 0) == doctest::Approx(0.5625).epsilon(1e-6));
}

TEST_CASE("one split pushforward carries the smoothed density onto the barycenter") {
  const LabeledDataset data = split_at_half();
  TreeLayerConfig cfg;
  cfg.fit.max_leaf_nodes = 2;
  cfg.kappa = 0.3;
  cfg.unit_interval = true;
  const auto maps = fit_tree_layer(data, WeightVector::uniform(2), cfg);

  // Rebuild the smoothed two-bin histograms and their barycenter
  // independently, then check F_bary(T_j(x)) = F_j(x) everywhere.
  TreeFitConfig fcfg;
  fcfg.max_leaf_nodes = 2;
  const SharedTree tree = fit_shared_tree(pool(data), pooled_labels(data), 2, fcfg);
  const Eigen::MatrixXd c = estimate_leaf_densities(
      tree, {data.classes[0].data, data.classes[1].data}, cfg.kappa);
  std::vector<Histogram1D> hists;
  std::vector<double> masses;
  for (int j = 0; j < 2; ++j) {
    Histogram1D h({0.0, 0.5, 1.0}, {c(j, 0), c(j, 1)});
    masses.push_back(h.total_mass());
    hists.push_back(std::move(h));
  }
  // Normalize to probability histograms as the layer does internally.
  std::vector<Histogram1D> norm;
  for (int j = 0; j < 2; ++j) {
    std::vector<double> dens = hists[j].densities();
    for (double& dv : dens) dv /= masses[j];
    norm.emplace_back(hists[j].edges(), dens);
  }
  const Histogram1D bary = histogram_barycenter(norm, WeightVector::uniform(2));
  for (int j = 0; j < 2; ++j) {
    for (double xv = 0.01; xv < 1.0; xv += 0.013) {
      Eigen::MatrixXd x(1, 1);
      x(0, 0) = xv;
      maps[j]->apply_forward(x);
      CHECK(bary.cdf(x(0, 0)) == doctest::Approx(norm[j].cdf(xv)).epsilon(1e-8));
    }
  }
}

TEST_CASE("maps round trip on and off the unit interval") {
  Rng rng(62);
  LabeledDataset data;
  for (int j = 0; j < 2; ++j) {
    Eigen::MatrixXd X(150, 2);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      X(i, 0) = rng.normal() + 1.5 * j;
      X(i, 1) = rng.normal() - j;
    }
    data.classes.push_back({X, j});
  }
  TreeLayerConfig cfg;
  cfg.fit.max_leaf_nodes = 6;
  const auto maps = fit_tree_layer(data, WeightVector::uniform(2), cfg);
  for (int j = 0; j < 2; ++j) {
    Eigen::MatrixXd X = data.classes[j].data;
    const Eigen::MatrixXd orig = X;
    maps[j]->apply_forward(X);
    CHECK((X - orig).norm() > 1e-3);  // it actually moves points
    maps[j]->apply_inverse(X);
    CHECK((X - orig).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("unit interval data round trips without the normal squash") {
  Rng rng(63);
  LabeledDataset data;
  for (int j = 0; j < 2; ++j) {
    Eigen::MatrixXd X(100, 2);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      X(i, 0) = std::pow(rng.next_double(), j + 1.0);
      X(i, 1) = rng.next_double();
    }
    data.classes.push_back({X, j});
  }
  TreeLayerConfig cfg;
  cfg.fit.max_leaf_nodes = 5;
  cfg.unit_interval = true;
  const auto maps = fit_tree_layer(data, WeightVector::uniform(2), cfg);
  for (int j = 0; j < 2; ++j) {
    Eigen::MatrixXd X = data.classes[j].data;
    const Eigen::MatrixXd orig = X;
    maps[j]->apply_forward(X);
    CHECK(X.minCoeff() >= 0.0);
    CHECK(X.maxCoeff() <= 1.0);
    maps[j]->apply_inverse(X);
    CHECK((X - orig).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("node mass weighting ignores the class weights") {
  // With uniform class weights the two weightings coincide; with skewed
  // weights only class_weighted responds, so the maps must differ.
  Rng rng(64);
  LabeledDataset data;
  for (int j = 0; j < 2; ++j) {
    Eigen::MatrixXd X(120, 1);
    for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, 0) = rng.normal() + 2.0 * j;
    data.classes.push_back({X, j});
  }
  const WeightVector skewed(std::vector<double>{0.2, 0.8});
  TreeLayerConfig a, b;
  a.fit.max_leaf_nodes = b.fit.max_leaf_nodes = 4;
  a.node_weights = TreeNodeWeighting::class_weighted;
  b.node_weights = TreeNodeWeighting::node_mass;
  const auto ma = fit_tree_layer(data, skewed, a);
  const auto mb = fit_tree_layer(data, skewed, b);
  const auto mu = fit_tree_layer(data, WeightVector::uniform(2), b);
  Eigen::MatrixXd xa(1, 1), xb(1, 1), xu(1, 1);
  xa(0, 0) = xb(0, 0) = xu(0, 0) = 0.0;
  ma[0]->apply_forward(xa);
  mb[0]->apply_forward(xb);
  mu[0]->apply_forward(xu);
  CHECK(xa(0, 0) != xb(0, 0));
  // node_mass does not read the weights at all.
  CHECK(xb(0, 0) == xu(0, 0));
}
