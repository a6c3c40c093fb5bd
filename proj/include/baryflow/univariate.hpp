#pragma once

#include <memory>
#include <span>
#include <vector>

#include "baryflow/histogram.hpp"
#include "baryflow/types.hpp"

namespace baryflow {

// One-dimensional density model: an affine standardization followed by
// the standard normal CDF squashes the line onto (0, 1), where an
// alpha-smoothed histogram lives. The smoothing keeps every bin density
// strictly positive, so cdf is a strictly increasing bijection onto (0, 1).
struct UnivariateDensity {
  double mean = 0.0;
  double stddev = 1.0;
  Histogram1D hist;

  double cdf(double x) const;
  double quantile(double u) const;  // throws for u outside (0, 1)
};

struct UnivariateFitConfig {
  int bins = 40;
  double alpha = 1.0;      // pseudo-count per bin
  double std_floor = 1e-8;
};

UnivariateDensity fit_univariate_density(std::span<const double> xs,
                                         const UnivariateFitConfig& cfg = {});

// Barycenter of k univariate densities under quadratic cost. Its quantile
// function is the weighted average of the component quantile functions and
// is evaluated exactly (no interpolation through the normal quantile), so
// identical components reproduce themselves to machine precision. The cdf
// inverts the quantile by bracketed bisection on a cached level grid.
class Barycenter1D {
 public:
  Barycenter1D(std::vector<UnivariateDensity> comps, WeightVector w);

  double quantile(double u) const;
  double cdf(double z) const;

  int k() const { return static_cast<int>(comps_.size()); }
  const UnivariateDensity& component(int j) const { return comps_[j]; }
  const WeightVector& weights() const { return w_; }
  const std::vector<double>& grid_u() const { return grid_u_; }
  const std::vector<double>& grid_x() const { return grid_x_; }

 private:
  std::vector<UnivariateDensity> comps_;
  WeightVector w_;
  std::vector<double> grid_u_, grid_x_, grid_s_;
};

// Optimal map from component j to the barycenter: forward = Q_bary o F_j,
// inverse = Q_j o F_bary. Both directions are strictly increasing.
class Monge1D {
 public:
  Monge1D(std::shared_ptr<const Barycenter1D> bary, int comp);

  double forward(double x) const;
  double inverse(double z) const;
  int component_index() const { return comp_; }
  const Barycenter1D& barycenter() const { return *bary_; }

 private:
  std::shared_ptr<const Barycenter1D> bary_;
  int comp_;
};

}  // namespace baryflow
