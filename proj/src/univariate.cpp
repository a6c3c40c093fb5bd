#include "baryflow/univariate.hpp"

#include <algorithm>
#include <cmath>

#include "baryflow/normal.hpp"

namespace baryflow {

namespace {

constexpr double kVLo = 1e-300;         // below Phi(-37)
constexpr double kVHi = 1.0 - 1.1e-16;  // largest double below 1 with slack
constexpr double kSLim = 37.5;
constexpr double kGridClip = 1e-9;

double clamp_unit(double v) { return std::clamp(v, kVLo, kVHi); }

}  // namespace

double UnivariateDensity::cdf(double x) const {
  const double t = std::clamp((x - mean) / stddev, -kSLim, kSLim);
  // Outer clamp: the cdf sum can round to 1.0 for samples far in the
  // upper tail, which would poison downstream quantile calls.
  return clamp_unit(hist.cdf(clamp_unit(norm_cdf(t))));
}

double UnivariateDensity::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw NumericError("quantile level must lie in (0, 1)");
  const double v = clamp_unit(hist.quantile(u));
  return mean + stddev * norm_quantile(v);
}

UnivariateDensity fit_univariate_density(std::span<const double> xs,
                                         const UnivariateFitConfig& cfg) {
  const size_t n = xs.size();
  if (n == 0) throw DataError("cannot fit a density to zero samples");
  if (cfg.bins < 1) throw ConfigError("histogram needs at least one bin");
  if (!(cfg.alpha > 0.0)) throw ConfigError("histogram smoothing alpha must be positive");

  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n);
  const double stddev = std::max(std::sqrt(var), cfg.std_floor);

  const int B = cfg.bins;
  std::vector<double> counts(B, 0.0);
  for (double x : xs) {
    const double v = clamp_unit(norm_cdf(std::clamp((x - mean) / stddev, -kSLim, kSLim)));
    const int b = std::min(B - 1, static_cast<int>(v * B));
    counts[b] += 1.0;
  }
  std::vector<double> edges(B + 1), densities(B);
  const double denom = static_cast<double>(n) + cfg.alpha * B;
  for (int b = 0; b <= B; ++b) edges[b] = static_cast<double>(b) / B;
  for (int b = 0; b < B; ++b) densities[b] = B * (counts[b] + cfg.alpha) / denom;
  return UnivariateDensity{mean, stddev, Histogram1D(std::move(edges), std::move(densities))};
}

Barycenter1D::Barycenter1D(std::vector<UnivariateDensity> comps, WeightVector w)
    : comps_(std::move(comps)), w_(std::move(w)) {
  if (comps_.empty()) throw DataError("barycenter needs at least one component");
  if (w_.size() != static_cast<int>(comps_.size()))
    throw DataError("weight count does not match component count");

  // Bracketing grid: union of every component's histogram levels,
  // clipped away from {0, 1} where the normal quantile blows up.
  std::vector<double> levels;
  for (const auto& c : comps_)
    for (double v : c.hist.cum())
      if (v > kGridClip && v < 1.0 - kGridClip) levels.push_back(v);
  std::sort(levels.begin(), levels.end());
  grid_u_ = {kGridClip};
  for (double v : levels)
    if (v - grid_u_.back() >= 1e-14 && (1.0 - kGridClip) - v >= 1e-14) grid_u_.push_back(v);
  grid_u_.push_back(1.0 - kGridClip);

  grid_x_.resize(grid_u_.size());
  grid_s_.resize(grid_u_.size());
  for (size_t i = 0; i < grid_u_.size(); ++i) {
    grid_x_[i] = quantile(grid_u_[i]);
    grid_s_[i] = norm_quantile(grid_u_[i]);
  }
}

double Barycenter1D::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw NumericError("quantile level must lie in (0, 1)");
  double acc = 0.0;
  for (int j = 0; j < k(); ++j) acc += w_[j] * comps_[j].quantile(u);
  return acc;
}

double Barycenter1D::cdf(double z) const {
  double lo, hi;
  if (z <= grid_x_.front()) {
    lo = -kSLim;
    hi = grid_s_.front();
  } else if (z >= grid_x_.back()) {
    lo = grid_s_.back();
    hi = kSLim;
  } else {
    const auto it = std::upper_bound(grid_x_.begin(), grid_x_.end(), z);
    const size_t i = static_cast<size_t>(it - grid_x_.begin()) - 1;
    lo = grid_s_[i];
    hi = grid_s_[i + 1];
  }
  // Bisection in the standardized coordinate keeps uniform resolution
  // through the tails. quantile is strictly increasing, so this converges.
  for (int it = 0; it < 64 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double zm = quantile(clamp_unit(norm_cdf(mid)));
    (zm < z ? lo : hi) = mid;
  }
  return clamp_unit(norm_cdf(0.5 * (lo + hi)));
}

Monge1D::Monge1D(std::shared_ptr<const Barycenter1D> bary, int comp)
    : bary_(std::move(bary)), comp_(comp) {
  if (!bary_) throw DataError("Monge1D needs a barycenter");
  if (comp_ < 0 || comp_ >= bary_->k()) throw DataError("Monge1D component index out of range");
}

double Monge1D::forward(double x) const {
  return bary_->quantile(bary_->component(comp_).cdf(x));
}

double Monge1D::inverse(double z) const { return bary_->component(comp_).quantile(bary_->cdf(z)); }

}  // namespace baryflow
