#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "baryflow/gaussian_layer.hpp"
#include "baryflow/map.hpp"
#include "baryflow/nb_layer.hpp"
#include "baryflow/tree_layer.hpp"
#include "baryflow/types.hpp"

namespace baryflow {

struct LayerConfig {
  std::string kind;  // "gaussian" | "nb" | "tree"
  GaussianLayerConfig gaussian;
  NbLayerConfig nb;
  TreeLayerConfig tree;

  void validate() const;
};

struct FittedLayer {
  std::string kind;
  std::vector<std::shared_ptr<const InvertibleMap>> per_class;
};

// A stack of fitted layers. Class j's composed map is the layer maps
// applied in fitting order; all classes share each layer's barycenter,
// so transformed classes agree in distribution up to estimation error.
struct FlowModel {
  int dim = 0;
  std::vector<int> labels;  // class_id per class slot
  WeightVector weights;
  std::uint64_t seed = 0;
  std::vector<FittedLayer> layers;

  int k() const { return static_cast<int>(labels.size()); }
  int class_index(int label) const;  // throws DataError if absent
  void check_class(int j) const;
};

// Called after each fitted layer with the number of layers done and the
// partial model (layers 1..done).
using LayerCallback = std::function<void(int done, const FlowModel&)>;

FlowModel fit_flow(const LabeledDataset& train, const WeightVector& w,
                   const std::vector<LayerConfig>& schedule, std::uint64_t seed,
                   const LayerCallback& on_layer = {});

// Push class j samples to the latent barycenter and back.
Eigen::MatrixXd transform(const FlowModel& model, int j, const Eigen::MatrixXd& pts);
Eigen::MatrixXd inverse_transform(const FlowModel& model, int j, const Eigen::MatrixXd& pts);

// Re-express class `from` samples as class `to` samples through the
// shared latent: T_to^{-1}(T_from(x)). from == to returns pts unchanged.
Eigen::MatrixXd flip(const FlowModel& model, int from, int to, const Eigen::MatrixXd& pts);

}  // namespace baryflow
