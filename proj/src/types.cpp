#include "baryflow/types.hpp"

#include <cmath>
#include <numeric>

namespace baryflow {

void SampleMatrix::validate() const {
  if (data.rows() == 0) throw DataError("class " + std::to_string(class_id) + " has no samples");
  if (data.cols() == 0) throw DataError("class " + std::to_string(class_id) + " has dimension 0");
  if (!data.allFinite())
    throw DataError("class " + std::to_string(class_id) + " contains non-finite values");
}

void LabeledDataset::validate(int min_k) const {
  if (k() < min_k)
    throw DataError("dataset needs at least " + std::to_string(min_k) + " classes, got " +
                    std::to_string(k()));
  const Eigen::Index d = dim();
  for (const auto& c : classes) {
    c.validate();
    if (c.dim() != d) throw DataError("classes disagree on dimension");
  }
}

int LabeledDataset::index_of_label(int label) const {
  for (int j = 0; j < k(); ++j)
    if (classes[j].class_id == label) return j;
  throw DataError("no class with label " + std::to_string(label));
}

WeightVector::WeightVector(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw ConfigError("weight vector is empty");
  double sum = 0.0;
  for (double v : w_) {
    if (!(v >= 0.0)) throw ConfigError("weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ConfigError("weights must sum to 1, got " + std::to_string(sum));
}

WeightVector WeightVector::uniform(int k) {
  if (k <= 0) throw ConfigError("weight vector needs k >= 1");
  return WeightVector(std::vector<double>(k, 1.0 / k));
}

}  // namespace baryflow
