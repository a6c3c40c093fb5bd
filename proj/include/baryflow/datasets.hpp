#pragma once

#include <string>
#include <vector>

#include "baryflow/rng.hpp"
#include "baryflow/types.hpp"

namespace baryflow {

enum class DatasetKind { moons, circles, random_pattern, gaussians };

// Everything a generator needs; the factory helpers fill in the
// documented defaults.
struct GeneratorSpec {
  DatasetKind kind = DatasetKind::moons;
  int k = 2;
  double noise = 0.05;
  // gaussians only: explicit class parameters.
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;

  static GeneratorSpec moons(double noise = 0.05);
  static GeneratorSpec circles(double noise = 0.05);
  // Per class, an even mixture of two isotropic Gaussians whose means are
  // drawn uniformly from [-3, 3]^2 by the generator's own substream.
  static GeneratorSpec random_pattern(int k = 2, double noise = 0.5);
  static GeneratorSpec gaussians();  // 3 overlapping 2-d Gaussians
};

// n_per_class samples per class; labels are 0..k-1 in order.
LabeledDataset generate(const GeneratorSpec& spec, int n_per_class, Rng& rng);

// CSV: optional header, d feature columns then an integer label column.
// Doubles are written shortest-round-trip, so write/parse round trips
// reproduce the exact bits.
std::string to_csv(const LabeledDataset& data);
LabeledDataset parse_csv(const std::string& text, const std::string& origin);
void write_csv(const std::string& path, const LabeledDataset& data);
LabeledDataset load_csv(const std::string& path);

// Simple scatter plot, one color per class.
std::string scatter_svg(const LabeledDataset& data, int width = 640, int height = 480);

}  // namespace baryflow
