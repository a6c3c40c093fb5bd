#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "baryflow/flow.hpp"
#include "baryflow/rng.hpp"
#include "baryflow/serialize.hpp"

using namespace baryflow;

namespace {

LabeledDataset mixed_data(Rng& rng, int n) {
  LabeledDataset data;
  for (int j = 0; j < 3; ++j) {
    Eigen::MatrixXd X(n, 2);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = rng.normal() * (1.0 + 0.3 * j) + 2.0 * j;
      X(i, 1) = rng.normal() - j;
    }
    data.classes.push_back({X, j});
  }
  return data;
}

FlowModel fitted_model(Rng& rng) {
  const LabeledDataset data = mixed_data(rng, 120);
  std::vector<LayerConfig> schedule(3);
  schedule[0].kind = "gaussian";
  schedule[1].kind = "nb";
  schedule[1].nb.fit.bins = 16;
  schedule[2].kind = "tree";
  schedule[2].tree.fit.max_leaf_nodes = 5;
  return fit_flow(data, WeightVector::uniform(3), schedule, 99);
}

}  // namespace

TEST_CASE("serialization round trips to identical bytes") {
  Rng rng(91);
  const FlowModel model = fitted_model(rng);
  const std::string first = model_to_json(model);
  const FlowModel loaded = model_from_json(first);
  const std::string second = model_to_json(loaded);
  CHECK(first == second);
  CHECK(first.back() == '\n');

  CHECK(loaded.dim == model.dim);
  CHECK(loaded.k() == model.k());
  CHECK(loaded.seed == model.seed);
  CHECK(loaded.labels == model.labels);
  REQUIRE(loaded.layers.size() == model.layers.size());
  for (size_t l = 0; l < model.layers.size(); ++l)
    CHECK(loaded.layers[l].kind == model.layers[l].kind);
}

TEST_CASE("loaded models transform bit-identically") {
  Rng rng(92);
  const FlowModel model = fitted_model(rng);
  const FlowModel loaded = model_from_json(model_to_json(model));
  const LabeledDataset fresh = mixed_data(rng, 60);
  for (int j = 0; j < 3; ++j) {
    const Eigen::MatrixXd a = transform(model, j, fresh.classes[j].data);
    const Eigen::MatrixXd b = transform(loaded, j, fresh.classes[j].data);
    CHECK(a == b);
    const Eigen::MatrixXd ai = inverse_transform(model, j, a);
    const Eigen::MatrixXd bi = inverse_transform(loaded, j, b);
    CHECK(ai == bi);
  }
}

TEST_CASE("file round trip") {
  Rng rng(93);
  const FlowModel model = fitted_model(rng);
  const std::string path =
      (std::filesystem::temp_directory_path() / "baryflow_serialize_test.json").string();
  save_model(model, path);
  const FlowModel loaded = load_model(path);
  CHECK(model_to_json(loaded) == model_to_json(model));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_model(path), DataError);
}

TEST_CASE("truncated input names the parse position") {
  Rng rng(94);
  const std::string text = model_to_json(fitted_model(rng));
  const std::string cut = text.substr(0, text.size() / 2);
  try {
    model_from_json(cut);
    FAIL("expected a parse failure");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("parse error") != std::string::npos);
  }
}

TEST_CASE("version and kind checks") {
  Rng rng(95);
  const FlowModel model = fitted_model(rng);
  std::string text = model_to_json(model);

  const std::string bad_version = [&] {
    std::string t = text;
    const auto at = t.find("\"version\": 1");
    REQUIRE(at != std::string::npos);
    t.replace(at, 12, "\"version\": 7");
    return t;
  }();
  CHECK_THROWS_AS(model_from_json(bad_version), ConfigError);

  const std::string bad_kind = [&] {
    std::string t = text;
    const auto at = t.find("\"kind\": \"gaussian\"");
    REQUIRE(at != std::string::npos);
    t.replace(at, 18, "\"kind\": \"mystery1\"");
    return t;
  }();
  CHECK_THROWS_AS(model_from_json(bad_kind), ConfigError);

  CHECK_THROWS_AS(model_from_json("{}"), DataError);     // missing version
  CHECK_THROWS_AS(model_from_json("[1, 2]"), DataError); // not an object
}

TEST_CASE("non-finite parameters refuse to serialize") {
  FlowModel model;
  model.dim = 1;
  model.labels = {0, 1};
  model.weights = WeightVector::uniform(2);
  FittedLayer layer;
  layer.kind = "gaussian";
  Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, std::nan(""));
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(1, 1);
  layer.per_class.push_back(std::make_shared<AffineMap>(Eigen::VectorXd::Zero(1),
                                                        Eigen::VectorXd::Zero(1), A, I));
  layer.per_class.push_back(std::make_shared<AffineMap>(Eigen::VectorXd::Zero(1),
                                                        Eigen::VectorXd::Zero(1), I, I));
  model.layers.push_back(std::move(layer));
  CHECK_THROWS_AS(model_to_json(model), NumericError);
}

TEST_CASE("tampered dimensions are caught on load") {
  Rng rng(96);
  std::string text = model_to_json(fitted_model(rng));
  const auto at = text.find("\"d\": 2");
  REQUIRE(at != std::string::npos);
  std::string t = text;
  t.replace(at, 6, "\"d\": 9");
  CHECK_THROWS_AS(model_from_json(t), DataError);
}
