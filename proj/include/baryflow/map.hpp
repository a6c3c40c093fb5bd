#pragma once

#include <Eigen/Dense>

namespace baryflow {

// One invertible transport step for a single class. Batch interface,
// rows are samples; maps mutate the block in place.
class InvertibleMap {
 public:
  virtual ~InvertibleMap() = default;
  virtual int dim() const = 0;
  virtual void apply_forward(Eigen::Ref<Eigen::MatrixXd> pts) const = 0;
  virtual void apply_inverse(Eigen::Ref<Eigen::MatrixXd> pts) const = 0;
  virtual const char* kind() const = 0;
};

}  // namespace baryflow
