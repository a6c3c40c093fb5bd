#include "baryflow/nb_layer.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace baryflow {

namespace {

void check_problem(const SlicedProblem& prob, const Eigen::MatrixXd& Q, double p) {
  if (prob.X.empty()) throw DataError("sliced problem has no classes");
  if (prob.w.size() != static_cast<int>(prob.X.size()))
    throw DataError("weight count does not match class count");
  const Eigen::Index n = prob.n(), d = prob.dim();
  for (const auto& X : prob.X)
    if (X.rows() != n || X.cols() != d)
      throw DataError("sliced problem needs equal-shaped class blocks");
  if (Q.rows() != d || Q.cols() < 1 || Q.cols() > d)
    throw DataError("frame shape does not match the data dimension");
  if (!(p >= 1.0)) throw ConfigError("sliced order p must be >= 1");
}

std::vector<int> sorted_perm(const Eigen::VectorXd& z) {
  std::vector<int> idx(z.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return z[a] < z[b]; });
  return idx;
}

}  // namespace

double mswd_objective(const SlicedProblem& prob, const Eigen::MatrixXd& Q, double p) {
  check_problem(prob, Q, p);
  const int k = static_cast<int>(prob.X.size());
  const Eigen::Index n = prob.n();
  const int m = static_cast<int>(Q.cols());

  double S = 0.0;
  Eigen::MatrixXd zs(n, k);
  for (int l = 0; l < m; ++l) {
    for (int j = 0; j < k; ++j) {
      Eigen::VectorXd z = prob.X[j] * Q.col(l);
      std::sort(z.data(), z.data() + z.size());
      zs.col(j) = z;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      double y = 0.0;
      for (int j = 0; j < k; ++j) y += prob.w[j] * zs(i, j);
      for (int j = 0; j < k; ++j)
        S += prob.w[j] * std::pow(std::abs(zs(i, j) - y), p) / static_cast<double>(n);
    }
  }
  return std::pow(S / m, 1.0 / p);
}

Eigen::MatrixXd mswd_gradient(const SlicedProblem& prob, const Eigen::MatrixXd& Q, double p) {
  check_problem(prob, Q, p);
  const int k = static_cast<int>(prob.X.size());
  const Eigen::Index n = prob.n();
  const int m = static_cast<int>(Q.cols());
  const double nn = static_cast<double>(n);

  // First pass: the objective level S, needed for the outer power's chain rule.
  double S = 0.0;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(Q.rows(), m);
  std::vector<std::vector<int>> perms(k);
  Eigen::MatrixXd zs(n, k);
  Eigen::MatrixXd coef(n, k);  // c_{j,i} = w_j |r|^(p-1) sgn(r) / n, rank order
  for (int l = 0; l < m; ++l) {
    for (int j = 0; j < k; ++j) {
      const Eigen::VectorXd z = prob.X[j] * Q.col(l);
      perms[j] = sorted_perm(z);
      for (Eigen::Index i = 0; i < n; ++i) zs(i, j) = z[perms[j][i]];
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      double y = 0.0;
      for (int j = 0; j < k; ++j) y += prob.w[j] * zs(i, j);
      for (int j = 0; j < k; ++j) {
        const double r = zs(i, j) - y;
        S += prob.w[j] * std::pow(std::abs(r), p) / nn;
        coef(i, j) = prob.w[j] * std::copysign(std::pow(std::abs(r), p - 1.0), r) / nn;
        if (r == 0.0) coef(i, j) = 0.0;
      }
    }
    // dS_l/dq = sum_j X_j^T s_j with s_j scattering (c_{j,i} - w_j b_i)
    // back to original sample order; b_i couples classes through the
    // shared barycenter order statistic.
    Eigen::VectorXd s(n);
    for (int j = 0; j < k; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        double b = 0.0;
        for (int jj = 0; jj < k; ++jj) b += coef(i, jj);
        s[perms[j][i]] = coef(i, j) - prob.w[j] * b;
      }
      G.col(l) += prob.X[j].transpose() * s;
    }
  }
  S /= m;
  if (S <= 0.0) return Eigen::MatrixXd::Zero(Q.rows(), m);
  // d/dq [ (S/1)^{1/p} ]: the inner p from |r|^p and the outer 1/p cancel.
  return (std::pow(S, 1.0 / p - 1.0) / m) * G;
}

Eigen::MatrixXd polar_frame(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

Eigen::MatrixXd random_frame(int d, int m, Rng& rng) {
  if (m < 1 || m > d) throw ConfigError("frame width must lie in [1, d]");
  Eigen::MatrixXd G(d, m);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < m; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, m);
  const Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

Eigen::MatrixXd find_mswd_frame(const SlicedProblem& prob, int m, const MswdConfig& cfg,
                                Rng& rng, MswdTrace* trace) {
  const int d = static_cast<int>(prob.dim());
  Eigen::MatrixXd Q = random_frame(d, m, rng);
  double V = mswd_objective(prob, Q, cfg.p);
  if (trace) {
    trace->frames.push_back(Q);
    trace->values.push_back(V);
  }
  for (int it = 0; it < cfg.max_iter; ++it) {
    const Eigen::MatrixXd G = mswd_gradient(prob, Q, cfg.p);
    double step = cfg.step0;
    bool accepted = false;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      const Eigen::MatrixXd Q_try = polar_frame(Q + step * G);
      const double V_try = mswd_objective(prob, Q_try, cfg.p);
      if (V_try > V) {
        const double gain = (V_try - V) / std::max(std::abs(V), 1e-300);
        Q = Q_try;
        V = V_try;
        if (trace) {
          trace->frames.push_back(Q);
          trace->values.push_back(V);
        }
        accepted = true;
        if (gain < cfg.tol) return Q;
        break;
      }
      step *= cfg.shrink;
    }
    if (!accepted) break;  // no ascent direction left at the smallest step
  }
  return Q;
}

NbLayerMap::NbLayerMap(std::shared_ptr<const Eigen::MatrixXd> Q, std::vector<Monge1D> dirs)
    : Q_(std::move(Q)), dirs_(std::move(dirs)) {
  if (!Q_ || Q_->cols() != static_cast<Eigen::Index>(dirs_.size()) || dirs_.empty())
    throw DataError("frame width and direction count disagree");
}

void NbLayerMap::apply_forward(Eigen::Ref<Eigen::MatrixXd> pts) const {
  Eigen::MatrixXd Z = pts * (*Q_);
  Eigen::MatrixXd W = Z;
  for (size_t l = 0; l < dirs_.size(); ++l)
    for (Eigen::Index i = 0; i < Z.rows(); ++i) W(i, l) = dirs_[l].forward(Z(i, l));
  pts += (W - Z) * Q_->transpose();
}

void NbLayerMap::apply_inverse(Eigen::Ref<Eigen::MatrixXd> pts) const {
  Eigen::MatrixXd Z = pts * (*Q_);
  Eigen::MatrixXd W = Z;
  for (size_t l = 0; l < dirs_.size(); ++l)
    for (Eigen::Index i = 0; i < Z.rows(); ++i) W(i, l) = dirs_[l].inverse(Z(i, l));
  pts += (W - Z) * Q_->transpose();
}

std::vector<std::shared_ptr<const InvertibleMap>> fit_nb_layer(const LabeledDataset& data,
                                                               const WeightVector& w,
                                                               const NbLayerConfig& cfg,
                                                               const Rng& rng) {
  data.validate(1);
  if (w.size() != data.k()) throw DataError("weight count does not match class count");
  const int d = static_cast<int>(data.dim());
  const int m = cfg.m == 0 ? d : cfg.m;
  if (m < 1 || m > d) throw ConfigError("frame width must lie in [1, d]");

  Eigen::MatrixXd Q;
  switch (cfg.frame) {
    case FrameSource::identity:
      Q = Eigen::MatrixXd::Identity(d, d).leftCols(m);
      break;
    case FrameSource::random: {
      Rng r = rng.substream("frame");
      Q = random_frame(d, m, r);
      break;
    }
    case FrameSource::mswd: {
      Eigen::Index n_common = data.classes.front().n();
      for (const auto& c : data.classes) n_common = std::min(n_common, c.n());
      SlicedProblem prob;
      prob.w = w;
      Rng sub = rng.substream("subsample");
      for (const auto& c : data.classes) {
        if (c.n() == n_common) {
          prob.X.push_back(c.data);
        } else {
          const auto idx = sub.sample_without_replacement(static_cast<int>(c.n()),
                                                          static_cast<int>(n_common));
          Eigen::MatrixXd X(n_common, d);
          for (Eigen::Index i = 0; i < n_common; ++i) X.row(i) = c.data.row(idx[i]);
          prob.X.push_back(std::move(X));
        }
      }
      Rng r = rng.substream("frame");
      Q = find_mswd_frame(prob, m, cfg.opt, r);
      break;
    }
  }

  auto Q_shared = std::make_shared<const Eigen::MatrixXd>(std::move(Q));
  std::vector<std::vector<UnivariateDensity>> per_dir(m);
  for (int l = 0; l < m; ++l) {
    per_dir[l].reserve(data.classes.size());
    for (const auto& c : data.classes) {
      const Eigen::VectorXd z = c.data * Q_shared->col(l);
      per_dir[l].push_back(
          fit_univariate_density(std::span<const double>(z.data(), z.size()), cfg.fit));
    }
  }
  std::vector<std::shared_ptr<const Barycenter1D>> barys;
  barys.reserve(m);
  for (int l = 0; l < m; ++l)
    barys.push_back(std::make_shared<const Barycenter1D>(std::move(per_dir[l]), w));

  std::vector<std::shared_ptr<const InvertibleMap>> maps;
  for (int j = 0; j < data.k(); ++j) {
    std::vector<Monge1D> dirs;
    dirs.reserve(m);
    for (int l = 0; l < m; ++l) dirs.emplace_back(barys[l], j);
    maps.push_back(std::make_shared<NbLayerMap>(Q_shared, std::move(dirs)));
  }
  return maps;
}

}  // namespace baryflow
