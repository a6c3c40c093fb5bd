#include "baryflow/flow.hpp"

#include "baryflow/rng.hpp"

namespace baryflow {

void LayerConfig::validate() const {
  if (kind != "gaussian" && kind != "nb" && kind != "tree")
    throw ConfigError("unknown layer kind '" + kind + "'");
}

int FlowModel::class_index(int label) const {
  for (int j = 0; j < k(); ++j)
    if (labels[j] == label) return j;
  throw DataError("model has no class with label " + std::to_string(label));
}

void FlowModel::check_class(int j) const {
  if (j < 0 || j >= k())
    throw DataError("class index " + std::to_string(j) + " out of range [0, " +
                    std::to_string(k()) + ")");
}

FlowModel fit_flow(const LabeledDataset& train, const WeightVector& w,
                   const std::vector<LayerConfig>& schedule, std::uint64_t seed,
                   const LayerCallback& on_layer) {
  train.validate(2);
  if (w.size() != train.k()) throw DataError("weight count does not match class count");
  for (const auto& cfg : schedule) cfg.validate();

  FlowModel model;
  model.dim = static_cast<int>(train.dim());
  model.weights = w;
  model.seed = seed;
  for (const auto& c : train.classes) model.labels.push_back(c.class_id);

  const Rng root(seed);
  LabeledDataset working = train;
  for (size_t l = 0; l < schedule.size(); ++l) {
    const LayerConfig& cfg = schedule[l];
    FittedLayer layer;
    layer.kind = cfg.kind;
    if (cfg.kind == "gaussian") {
      layer.per_class = fit_gaussian_layer(working, w, cfg.gaussian);
    } else if (cfg.kind == "nb") {
      const Rng layer_rng = root.substream("layer/" + std::to_string(l));
      layer.per_class = fit_nb_layer(working, w, cfg.nb, layer_rng);
    } else {
      layer.per_class = fit_tree_layer(working, w, cfg.tree);
    }
    for (int j = 0; j < working.k(); ++j)
      layer.per_class[j]->apply_forward(working.classes[j].data);
    model.layers.push_back(std::move(layer));
    if (on_layer) on_layer(static_cast<int>(l) + 1, model);
  }
  return model;
}

Eigen::MatrixXd transform(const FlowModel& model, int j, const Eigen::MatrixXd& pts) {
  model.check_class(j);
  if (pts.cols() != model.dim) throw DataError("point dimension does not match the model");
  Eigen::MatrixXd out = pts;
  for (const auto& layer : model.layers) layer.per_class[j]->apply_forward(out);
  return out;
}

Eigen::MatrixXd inverse_transform(const FlowModel& model, int j, const Eigen::MatrixXd& pts) {
  model.check_class(j);
  if (pts.cols() != model.dim) throw DataError("point dimension does not match the model");
  Eigen::MatrixXd out = pts;
  for (auto it = model.layers.rbegin(); it != model.layers.rend(); ++it)
    it->per_class[j]->apply_inverse(out);
  return out;
}

Eigen::MatrixXd flip(const FlowModel& model, int from, int to, const Eigen::MatrixXd& pts) {
  model.check_class(from);
  model.check_class(to);
  if (from == to) return pts;  // identity by definition, kept exact
  return inverse_transform(model, to, transform(model, from, pts));
}

}  // namespace baryflow
