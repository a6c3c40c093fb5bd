#pragma once

#include <vector>

#include "baryflow/types.hpp"

namespace baryflow {

// Piecewise-constant density on [edges.front(), edges.back()].
// Densities are strictly positive so the CDF is strictly increasing
// on the support and the quantile function is well defined.
class Histogram1D {
 public:
  Histogram1D(std::vector<double> edges, std::vector<double> densities);

  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& densities() const { return densities_; }
  int bins() const { return static_cast<int>(densities_.size()); }

  // Cumulative masses at the edges: cum()[0] = 0, cum().back() = total mass.
  const std::vector<double>& cum() const { return cum_; }
  double total_mass() const { return cum_.back(); }

  double cdf(double x) const;       // clamps outside the support
  double quantile(double u) const;  // u in [0, total mass]

 private:
  std::vector<double> edges_;
  std::vector<double> densities_;
  std::vector<double> cum_;
};

// Quantile function stored as breakpoints: strictly increasing levels u
// from 0 to 1 and the matching positions x, linear in between.
struct QuantileFunction {
  std::vector<double> u;
  std::vector<double> x;

  double operator()(double level) const;
  void validate() const;
};

// Strictly increasing piecewise-linear bijection given by matched
// breakpoints. Outside the breakpoint range it extends linearly with
// the slope of the end segment, so it stays a bijection of the line.
class PiecewiseLinearMap {
 public:
  PiecewiseLinearMap(std::vector<double> in, std::vector<double> out);

  double forward(double x) const;
  double inverse(double y) const;

  const std::vector<double>& in_points() const { return in_; }
  const std::vector<double>& out_points() const { return out_; }

 private:
  static double eval(const std::vector<double>& a, const std::vector<double>& b, double x);
  std::vector<double> in_, out_;
};

// Quantile function of the barycenter of histograms: the weighted average
// of the component quantile functions, evaluated exactly on the union of
// all cumulative levels. The result is again piecewise linear.
QuantileFunction barycenter_quantile(const std::vector<Histogram1D>& hists,
                                     const WeightVector& w);

// Barycenter as a histogram again; adjacent bins with equal density are
// merged, so the edge count never exceeds the total input edge count.
Histogram1D histogram_barycenter(const std::vector<Histogram1D>& hists, const WeightVector& w);

// Monge map pushing hist forward onto the barycenter described by q,
// i.e. x -> q(F(x)). Exact (piecewise linear) for histogram sources.
PiecewiseLinearMap hist_monge_map(const Histogram1D& hist, const QuantileFunction& q);

}  // namespace baryflow
