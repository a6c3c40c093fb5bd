#include "baryflow/serialize.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "baryflow/histogram.hpp"

namespace baryflow {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw NumericError("refusing to serialize non-finite values");
    a.push_back(v[i]);
  }
  return a;
}

json vec_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError("refusing to serialize non-finite values");
    a.push_back(x);
  }
  return a;
}

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) throw NumericError("refusing to serialize non-finite values");
      row.push_back(m(i, j));
    }
    rows.push_back(row);
  }
  return rows;
}

Eigen::VectorXd vec_from(const json& a, const char* what) {
  if (!a.is_array()) throw DataError(std::string("model field '") + what + "' must be an array");
  Eigen::VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

std::vector<double> dvec_from(const json& a, const char* what) {
  if (!a.is_array()) throw DataError(std::string("model field '") + what + "' must be an array");
  std::vector<double> v;
  v.reserve(a.size());
  for (const auto& x : a) v.push_back(x.get<double>());
  return v;
}

Eigen::MatrixXd mat_from(const json& a, const char* what) {
  if (!a.is_array() || a.empty())
    throw DataError(std::string("model field '") + what + "' must be a non-empty array");
  const size_t cols = a[0].size();
  Eigen::MatrixXd m(a.size(), cols);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != cols)
      throw DataError(std::string("model field '") + what + "' has ragged rows");
    for (size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i][j].get<double>();
  }
  return m;
}

json layer_json(const FittedLayer& layer) {
  json out;
  out["kind"] = layer.kind;
  if (layer.kind == "gaussian") {
    json maps = json::array();
    for (const auto& m : layer.per_class) {
      const auto* a = dynamic_cast<const AffineMap*>(m.get());
      if (!a) throw DataError("gaussian layer holds a non-affine map");
      maps.push_back(json{{"mean_in", vec_json(a->mean_in())},
                          {"mean_out", vec_json(a->mean_out())},
                          {"A", mat_json(a->matrix())},
                          {"A_inv", mat_json(a->matrix_inv())}});
    }
    out["maps"] = std::move(maps);
  } else if (layer.kind == "nb") {
    const auto* first = dynamic_cast<const NbLayerMap*>(layer.per_class.front().get());
    if (!first) throw DataError("nb layer holds a foreign map");
    out["frame"] = mat_json(first->frame());
    json dirs = json::array();
    for (const auto& dir : first->directions()) {
      const Barycenter1D& bary = dir.barycenter();
      json comps = json::array();
      for (int j = 0; j < bary.k(); ++j) {
        const UnivariateDensity& c = bary.component(j);
        comps.push_back(json{{"mean", c.mean},
                             {"stddev", c.stddev},
                             {"densities", vec_json(c.hist.densities())}});
      }
      dirs.push_back(json{{"components", std::move(comps)}});
    }
    out["directions"] = std::move(dirs);
  } else if (layer.kind == "tree") {
    const auto* first = dynamic_cast<const TreeMongeMap*>(layer.per_class.front().get());
    if (!first) throw DataError("tree layer holds a foreign map");
    out["gauss_pre"] = first->gauss_pre();
    json nodes = json::array();
    for (const auto& nd : first->tree().nodes) {
      nodes.push_back(json{{"left", nd.left},
                           {"right", nd.right},
                           {"dim", nd.split_dim},
                           {"thr", nd.threshold},
                           {"lo", nd.lo},
                           {"hi", nd.hi},
                           {"vol", nd.volume}});
    }
    out["nodes"] = std::move(nodes);
    json class_maps = json::array();
    for (const auto& m : layer.per_class) {
      const auto* t = dynamic_cast<const TreeMongeMap*>(m.get());
      if (!t) throw DataError("tree layer holds a foreign map");
      json per_node = json::array();
      for (const auto& nm : t->node_maps()) {
        if (nm) {
          per_node.push_back(
              json{{"in", vec_json(nm->in_points())}, {"out", vec_json(nm->out_points())}});
        } else {
          per_node.push_back(nullptr);
        }
      }
      class_maps.push_back(std::move(per_node));
    }
    out["class_maps"] = std::move(class_maps);
  } else {
    throw ConfigError("unsupported layer kind '" + layer.kind + "'");
  }
  return out;
}

FittedLayer layer_from(const json& in, int k, int d, const WeightVector& w) {
  if (!in.contains("kind")) throw DataError("model layer is missing its kind tag");
  FittedLayer layer;
  layer.kind = in["kind"].get<std::string>();
  if (layer.kind == "gaussian") {
    const auto& maps = in.at("maps");
    if (static_cast<int>(maps.size()) != k) throw DataError("gaussian layer map count mismatch");
    for (const auto& mj : maps) {
      layer.per_class.push_back(std::make_shared<AffineMap>(
          vec_from(mj.at("mean_in"), "mean_in"), vec_from(mj.at("mean_out"), "mean_out"),
          mat_from(mj.at("A"), "A"), mat_from(mj.at("A_inv"), "A_inv")));
    }
  } else if (layer.kind == "nb") {
    auto Q = std::make_shared<const Eigen::MatrixXd>(mat_from(in.at("frame"), "frame"));
    std::vector<std::shared_ptr<const Barycenter1D>> barys;
    for (const auto& dj : in.at("directions")) {
      std::vector<UnivariateDensity> comps;
      const auto& cj = dj.at("components");
      if (static_cast<int>(cj.size()) != k) throw DataError("nb layer component count mismatch");
      for (const auto& c : cj) {
        std::vector<double> densities = dvec_from(c.at("densities"), "densities");
        const int B = static_cast<int>(densities.size());
        std::vector<double> edges(B + 1);
        for (int b = 0; b <= B; ++b) edges[b] = static_cast<double>(b) / B;
        comps.push_back(UnivariateDensity{c.at("mean").get<double>(),
                                          c.at("stddev").get<double>(),
                                          Histogram1D(std::move(edges), std::move(densities))});
      }
      barys.push_back(std::make_shared<const Barycenter1D>(std::move(comps), w));
    }
    for (int j = 0; j < k; ++j) {
      std::vector<Monge1D> dirs;
      dirs.reserve(barys.size());
      for (const auto& b : barys) dirs.emplace_back(b, j);
      layer.per_class.push_back(std::make_shared<NbLayerMap>(Q, std::move(dirs)));
    }
  } else if (layer.kind == "tree") {
    SharedTree tree;
    const auto& nodes = in.at("nodes");
    for (const auto& nj : nodes) {
      TreeNode nd;
      nd.left = nj.at("left").get<int>();
      nd.right = nj.at("right").get<int>();
      nd.split_dim = nj.at("dim").get<int>();
      nd.threshold = nj.at("thr").get<double>();
      nd.lo = nj.at("lo").get<double>();
      nd.hi = nj.at("hi").get<double>();
      nd.volume = nj.at("vol").get<double>();
      tree.nodes.push_back(nd);
    }
    if (tree.nodes.empty()) throw DataError("tree layer has no nodes");
    tree.dim = d;
    for (const auto& nd : tree.nodes)
      if (nd.split_dim >= d) throw DataError("tree split dimension exceeds the model dimension");
    const bool gauss_pre = in.at("gauss_pre").get<bool>();
    auto tree_ptr = std::make_shared<const SharedTree>(std::move(tree));
    const auto& class_maps = in.at("class_maps");
    if (static_cast<int>(class_maps.size()) != k)
      throw DataError("tree layer class map count mismatch");
    for (const auto& per_node_json : class_maps) {
      auto node_maps = std::make_shared<TreeMongeMap::NodeMaps>();
      for (const auto& nm : per_node_json) {
        if (nm.is_null()) {
          node_maps->push_back(std::nullopt);
        } else {
          node_maps->emplace(node_maps->end(),
                             PiecewiseLinearMap(dvec_from(nm.at("in"), "in"),
                                                dvec_from(nm.at("out"), "out")));
        }
      }
      layer.per_class.push_back(
          std::make_shared<TreeMongeMap>(tree_ptr, std::move(node_maps), gauss_pre));
    }
  } else {
    throw ConfigError("unsupported layer kind '" + layer.kind + "'");
  }
  return layer;
}

}  // namespace

std::string model_to_json(const FlowModel& model) {
  json j;
  j["version"] = kSchemaVersion;
  j["d"] = model.dim;
  j["k"] = model.k();
  j["labels"] = model.labels;
  j["weights"] = vec_json(model.weights.values());
  j["seed"] = model.seed;
  json layers = json::array();
  for (const auto& layer : model.layers) layers.push_back(layer_json(layer));
  j["layers"] = std::move(layers);
  return j.dump(2) + "\n";
}

FlowModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model parse error: ") + e.what());
  }
  try {
    if (!j.contains("version") || !j["version"].is_number_integer())
      throw DataError("model is missing an integer 'version'");
    const int version = j["version"].get<int>();
    if (version != kSchemaVersion)
      throw ConfigError("unsupported model schema version " + std::to_string(version) +
                        " (expected " + std::to_string(kSchemaVersion) + ")");
    FlowModel model;
    model.dim = j.at("d").get<int>();
    model.labels = j.at("labels").get<std::vector<int>>();
    model.weights = WeightVector(j.at("weights").get<std::vector<double>>());
    model.seed = j.at("seed").get<std::uint64_t>();
    const int k = j.at("k").get<int>();
    if (k != model.k()) throw DataError("model 'k' does not match its label list");
    for (const auto& lj : j.at("layers")) {
      FittedLayer layer = layer_from(lj, k, model.dim, model.weights);
      for (const auto& m : layer.per_class)
        if (m->dim() != model.dim) throw DataError("layer dimension does not match the model");
      model.layers.push_back(std::move(layer));
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model: ") + e.what());
  }
}

void save_model(const FlowModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << model_to_json(model);
  if (!out) throw DataError("failed writing model to '" + path + "'");
}

FlowModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace baryflow
