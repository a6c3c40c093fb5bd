#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace baryflow {

// Error categories map onto distinct CLI exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// n samples of dimension d, one class. Rows are samples.
struct SampleMatrix {
  Eigen::MatrixXd data;
  int class_id = 0;

  Eigen::Index n() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
  void validate() const;
};

// Ordered list of k classes with a common dimension.
struct LabeledDataset {
  std::vector<SampleMatrix> classes;

  int k() const { return static_cast<int>(classes.size()); }
  Eigen::Index dim() const { return classes.empty() ? 0 : classes.front().dim(); }
  void validate(int min_k = 2) const;
  int index_of_label(int label) const;  // throws DataError if absent
};

// Non-negative weights summing to one (1e-12 slack).
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<double> w);
  static WeightVector uniform(int k);

  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int j) const { return w_[j]; }
  const std::vector<double>& values() const { return w_; }

 private:
  std::vector<double> w_;
};

}  // namespace baryflow
