#include "baryflow/gaussian_layer.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace baryflow {

namespace {

Eigen::MatrixXd sym(const Eigen::MatrixXd& M) { return 0.5 * (M + M.transpose()); }

// Square root and inverse square root of a symmetric PD matrix.
void sqrt_invsqrt_pd(const Eigen::MatrixXd& C, Eigen::MatrixXd& S, Eigen::MatrixXd& S_inv,
                     const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(C));
  if (es.info() != Eigen::Success) throw NumericError(std::string(what) + ": eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (!(ev.minCoeff() > 0.0))
    throw NumericError(std::string(what) + " is singular (min eigenvalue " +
                       std::to_string(ev.minCoeff()) + ")");
  const Eigen::VectorXd r = ev.array().sqrt();
  S = sym(es.eigenvectors() * r.asDiagonal() * es.eigenvectors().transpose());
  S_inv = sym(es.eigenvectors() * r.cwiseInverse().asDiagonal() * es.eigenvectors().transpose());
}

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace

GaussianParams estimate_gaussian(const Eigen::MatrixXd& samples, double lambda_reg) {
  const Eigen::Index n = samples.rows();
  if (n < 2) throw DataError("covariance estimation needs at least 2 samples");
  if (lambda_reg < 0.0) throw ConfigError("lambda_reg must be non-negative");
  GaussianParams p;
  p.mean = samples.colwise().mean();
  const Eigen::MatrixXd centered = samples.rowwise() - p.mean.transpose();
  p.cov = sym(centered.transpose() * centered / static_cast<double>(n));
  p.cov.diagonal().array() += lambda_reg;
  return p;
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& C) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(C));
  if (es.info() != Eigen::Success) throw NumericError("matrix_sqrt_psd: eigensolver failed");
  const Eigen::VectorXd r = es.eigenvalues().array().max(0.0).sqrt();
  return sym(es.eigenvectors() * r.asDiagonal() * es.eigenvectors().transpose());
}

GaussianParams gaussian_barycenter(const std::vector<GaussianParams>& params,
                                   const WeightVector& w, const FixedPointConfig& cfg) {
  if (params.empty()) throw DataError("barycenter needs at least one Gaussian");
  if (w.size() != static_cast<int>(params.size()))
    throw DataError("weight count does not match Gaussian count");
  const Eigen::Index d = params.front().mean.size();
  for (const auto& p : params)
    if (p.mean.size() != d || p.cov.rows() != d || p.cov.cols() != d)
      throw DataError("Gaussians disagree on dimension");

  bool all_same = true;
  for (size_t j = 1; j < params.size() && all_same; ++j)
    all_same = bitwise_equal(params[j].mean, params.front().mean) &&
               bitwise_equal(params[j].cov, params.front().cov);
  if (all_same) return params.front();

  GaussianParams bary;
  bary.mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(d, d);
  for (size_t j = 0; j < params.size(); ++j) {
    bary.mean += w[static_cast<int>(j)] * params[j].mean;
    C += w[static_cast<int>(j)] * params[j].cov;
  }
  C = sym(C);

  Eigen::MatrixXd S(d, d), S_inv(d, d);
  double res = 0.0;
  for (int it = 0; it < cfg.max_iter; ++it) {
    sqrt_invsqrt_pd(C, S, S_inv, "barycenter covariance iterate");
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(d, d);
    for (size_t j = 0; j < params.size(); ++j)
      T += w[static_cast<int>(j)] * matrix_sqrt_psd(sym(S * params[j].cov * S));
    T = sym(T);
    res = (T - C).norm() / C.norm();
    if (res < cfg.tol) {
      bary.cov = C;
      return bary;
    }
    C = sym(S_inv * T * T * S_inv);
  }
  throw NumericError("covariance fixed point did not converge: relative residual " +
                     std::to_string(res) + " after " + std::to_string(cfg.max_iter) +
                     " iterations");
}

AffineMap::AffineMap(Eigen::VectorXd mean_in, Eigen::VectorXd mean_out, Eigen::MatrixXd A,
                     Eigen::MatrixXd A_inv)
    : mean_in_(std::move(mean_in)),
      mean_out_(std::move(mean_out)),
      A_(std::move(A)),
      A_inv_(std::move(A_inv)) {
  const Eigen::Index d = mean_in_.size();
  if (mean_out_.size() != d || A_.rows() != d || A_.cols() != d || A_inv_.rows() != d ||
      A_inv_.cols() != d)
    throw DataError("affine map dimensions disagree");
}

void AffineMap::apply_forward(Eigen::Ref<Eigen::MatrixXd> pts) const {
  pts = ((pts.rowwise() - mean_in_.transpose()) * A_.transpose()).rowwise() +
        mean_out_.transpose();
}

void AffineMap::apply_inverse(Eigen::Ref<Eigen::MatrixXd> pts) const {
  pts = ((pts.rowwise() - mean_out_.transpose()) * A_inv_.transpose()).rowwise() +
        mean_in_.transpose();
}

AffineMap gaussian_monge_map(const GaussianParams& from, const GaussianParams& bary) {
  const Eigen::Index d = from.mean.size();
  if (bary.mean.size() != d) throw DataError("Gaussians disagree on dimension");
  if (bitwise_equal(from.cov, bary.cov)) {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    return AffineMap(from.mean, bary.mean, I, I);
  }
  Eigen::MatrixXd Sj(d, d), Sj_inv(d, d), Sm(d, d), Sm_inv(d, d);
  sqrt_invsqrt_pd(from.cov, Sj, Sj_inv, "class covariance");
  sqrt_invsqrt_pd(sym(Sj * bary.cov * Sj), Sm, Sm_inv, "barycenter covariance");
  return AffineMap(from.mean, bary.mean, sym(Sj_inv * Sm * Sj_inv), sym(Sj * Sm_inv * Sj));
}

std::vector<std::shared_ptr<const InvertibleMap>> fit_gaussian_layer(
    const LabeledDataset& data, const WeightVector& w, const GaussianLayerConfig& cfg) {
  data.validate(1);
  if (w.size() != data.k()) throw DataError("weight count does not match class count");
  std::vector<GaussianParams> params;
  params.reserve(data.classes.size());
  for (const auto& c : data.classes) params.push_back(estimate_gaussian(c.data, cfg.lambda_reg));
  const GaussianParams bary = gaussian_barycenter(params, w, cfg.fixed_point);
  std::vector<std::shared_ptr<const InvertibleMap>> maps;
  maps.reserve(params.size());
  for (const auto& p : params)
    maps.push_back(std::make_shared<AffineMap>(gaussian_monge_map(p, bary)));
  return maps;
}

}  // namespace baryflow
