#pragma once

#include <memory>
#include <vector>

#include "baryflow/map.hpp"
#include "baryflow/types.hpp"

namespace baryflow {

struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// MLE mean/covariance with a ridge lambda_reg * I on the covariance.
GaussianParams estimate_gaussian(const Eigen::MatrixXd& samples, double lambda_reg);

// Symmetric PSD square root via eigendecomposition; tiny negative
// eigenvalues are clipped to zero.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& C);

struct FixedPointConfig {
  double tol = 1e-9;  // relative residual ||Psi(C) - C||_F / ||C||_F
  int max_iter = 200;
};

// Barycenter of Gaussians under quadratic cost: weighted mean plus the
// covariance fixed point of Psi(C) = sum_j w_j (C^1/2 C_j C^1/2)^1/2.
// Identical inputs are returned unchanged so downstream maps are exactly
// the identity in that case.
GaussianParams gaussian_barycenter(const std::vector<GaussianParams>& params,
                                   const WeightVector& w, const FixedPointConfig& cfg = {});

class AffineMap final : public InvertibleMap {
 public:
  AffineMap(Eigen::VectorXd mean_in, Eigen::VectorXd mean_out, Eigen::MatrixXd A,
            Eigen::MatrixXd A_inv);

  int dim() const override { return static_cast<int>(mean_in_.size()); }
  void apply_forward(Eigen::Ref<Eigen::MatrixXd> pts) const override;
  void apply_inverse(Eigen::Ref<Eigen::MatrixXd> pts) const override;
  const char* kind() const override { return "gaussian"; }

  const Eigen::VectorXd& mean_in() const { return mean_in_; }
  const Eigen::VectorXd& mean_out() const { return mean_out_; }
  const Eigen::MatrixXd& matrix() const { return A_; }
  const Eigen::MatrixXd& matrix_inv() const { return A_inv_; }

 private:
  Eigen::VectorXd mean_in_, mean_out_;
  Eigen::MatrixXd A_, A_inv_;
};

// Optimal map N(m_j, C_j) -> N(m_bary, C_bary):
//   x -> m_bary + A (x - m_j),  A = C_j^-1/2 (C_j^1/2 C_bary C_j^1/2)^1/2 C_j^-1/2,
// the unique symmetric PD solution of A C_j A = C_bary.
AffineMap gaussian_monge_map(const GaussianParams& from, const GaussianParams& bary);

struct GaussianLayerConfig {
  double lambda_reg = 1e-6;
  FixedPointConfig fixed_point;
};

std::vector<std::shared_ptr<const InvertibleMap>> fit_gaussian_layer(
    const LabeledDataset& data, const WeightVector& w, const GaussianLayerConfig& cfg = {});

}  // namespace baryflow
