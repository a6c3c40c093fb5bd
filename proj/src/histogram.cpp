#include "baryflow/histogram.hpp"

#include <algorithm>
#include <cmath>

namespace baryflow {

Histogram1D::Histogram1D(std::vector<double> edges, std::vector<double> densities)
    : edges_(std::move(edges)), densities_(std::move(densities)) {
  if (edges_.size() < 2) throw DataError("histogram needs at least 2 edges");
  if (densities_.size() + 1 != edges_.size())
    throw DataError("histogram needs one density per bin");
  for (size_t i = 0; i + 1 < edges_.size(); ++i)
    if (!(edges_[i] < edges_[i + 1])) throw DataError("histogram edges must strictly increase");
  for (double d : densities_)
    if (!(d > 0.0) || !std::isfinite(d))
      throw DataError("histogram densities must be positive and finite");
  cum_.resize(edges_.size());
  cum_[0] = 0.0;
  for (size_t b = 0; b < densities_.size(); ++b)
    cum_[b + 1] = cum_[b] + densities_[b] * (edges_[b + 1] - edges_[b]);
}

double Histogram1D::cdf(double x) const {
  if (x <= edges_.front()) return 0.0;
  if (x >= edges_.back()) return total_mass();
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  const size_t b = static_cast<size_t>(it - edges_.begin()) - 1;
  return cum_[b] + densities_[b] * (x - edges_[b]);
}

double Histogram1D::quantile(double u) const {
  const double total = total_mass();
  if (!(u >= -1e-12 && u <= total + 1e-12))
    throw DataError("histogram quantile level outside [0, total mass]");
  u = std::clamp(u, 0.0, total);
  if (u >= total) return edges_.back();
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  size_t b = it == cum_.end() ? cum_.size() - 2 : static_cast<size_t>(it - cum_.begin()) - 1;
  return edges_[b] + (u - cum_[b]) / densities_[b];
}

double QuantileFunction::operator()(double level) const {
  if (level <= u.front()) return x.front();
  if (level >= u.back()) return x.back();
  const auto it = std::upper_bound(u.begin(), u.end(), level);
  const size_t i = static_cast<size_t>(it - u.begin()) - 1;
  const double t = (level - u[i]) / (u[i + 1] - u[i]);
  return x[i] + t * (x[i + 1] - x[i]);
}

void QuantileFunction::validate() const {
  if (u.size() != x.size() || u.size() < 2)
    throw DataError("quantile function needs matched breakpoints");
  if (u.front() != 0.0 || u.back() != 1.0)
    throw DataError("quantile function levels must span [0, 1]");
  for (size_t i = 0; i + 1 < u.size(); ++i)
    if (!(u[i] < u[i + 1]) || !(x[i] < x[i + 1]))
      throw DataError("quantile function breakpoints must strictly increase");
}

PiecewiseLinearMap::PiecewiseLinearMap(std::vector<double> in, std::vector<double> out)
    : in_(std::move(in)), out_(std::move(out)) {
  if (in_.size() != out_.size() || in_.size() < 2)
    throw DataError("piecewise-linear map needs matched breakpoints");
  for (size_t i = 0; i + 1 < in_.size(); ++i)
    if (!(in_[i] < in_[i + 1]) || !(out_[i] < out_[i + 1]))
      throw DataError("piecewise-linear map breakpoints must strictly increase");
}

double PiecewiseLinearMap::eval(const std::vector<double>& a, const std::vector<double>& b,
                                double x) {
  const size_t n = a.size();
  size_t i;
  if (x <= a.front()) {
    i = 0;
  } else if (x >= a.back()) {
    i = n - 2;
  } else {
    i = static_cast<size_t>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) - 1;
  }
  const double t = (x - a[i]) / (a[i + 1] - a[i]);
  return b[i] + t * (b[i + 1] - b[i]);
}

double PiecewiseLinearMap::forward(double x) const { return eval(in_, out_, x); }
double PiecewiseLinearMap::inverse(double y) const { return eval(out_, in_, y); }

namespace {

// Union of all normalized cumulative levels plus {0, 1}; levels closer
// than 1e-14 are collapsed so downstream density ratios stay sane.
std::vector<double> merged_levels(const std::vector<std::vector<double>>& level_sets) {
  std::vector<double> levels;
  for (const auto& ls : level_sets)
    for (double v : ls)
      if (v > 0.0 && v < 1.0) levels.push_back(v);
  std::sort(levels.begin(), levels.end());
  std::vector<double> out{0.0};
  for (double v : levels)
    if (v - out.back() >= 1e-14 && 1.0 - v >= 1e-14) out.push_back(v);
  out.push_back(1.0);
  return out;
}

std::vector<double> normalized_cum(const Histogram1D& h) {
  std::vector<double> ls(h.cum());
  const double total = h.total_mass();
  for (double& v : ls) v /= total;
  return ls;
}

}  // namespace

QuantileFunction barycenter_quantile(const std::vector<Histogram1D>& hists,
                                     const WeightVector& w) {
  if (hists.empty()) throw DataError("barycenter needs at least one histogram");
  if (w.size() != static_cast<int>(hists.size()))
    throw DataError("weight count does not match histogram count");

  std::vector<std::vector<double>> level_sets;
  level_sets.reserve(hists.size());
  for (const auto& h : hists) level_sets.push_back(normalized_cum(h));
  const std::vector<double> levels = merged_levels(level_sets);

  QuantileFunction q;
  q.u = levels;
  q.x.resize(levels.size());
  for (size_t i = 0; i < levels.size(); ++i) {
    double acc = 0.0;
    for (size_t j = 0; j < hists.size(); ++j)
      acc += w[static_cast<int>(j)] * hists[j].quantile(levels[i] * hists[j].total_mass());
    q.x[i] = acc;
  }
  q.validate();
  return q;
}

Histogram1D histogram_barycenter(const std::vector<Histogram1D>& hists, const WeightVector& w) {
  const QuantileFunction q = barycenter_quantile(hists, w);
  std::vector<double> edges{q.x.front()};
  std::vector<double> densities;
  for (size_t i = 0; i + 1 < q.u.size(); ++i) {
    const double d = (q.u[i + 1] - q.u[i]) / (q.x[i + 1] - q.x[i]);
    if (!densities.empty() &&
        std::abs(d - densities.back()) <= 1e-12 * std::max(d, densities.back())) {
      edges.back() = q.x[i + 1];  // same density, extend the bin
    } else {
      edges.push_back(q.x[i + 1]);
      densities.push_back(d);
    }
  }
  return Histogram1D(std::move(edges), std::move(densities));
}

PiecewiseLinearMap hist_monge_map(const Histogram1D& hist, const QuantileFunction& q) {
  const std::vector<double> levels = merged_levels({normalized_cum(hist), q.u});
  std::vector<double> in, out;
  in.reserve(levels.size());
  out.reserve(levels.size());
  for (double l : levels) {
    const double xin = hist.quantile(l * hist.total_mass());
    const double xout = q(l);
    if (!in.empty() && (xin - in.back() < 1e-13 * (1.0 + std::abs(xin)) ||
                        xout - out.back() < 1e-13 * (1.0 + std::abs(xout)))) {
      if (l == 1.0) {  // keep the endpoint, drop its too-close predecessor
        in.back() = xin;
        out.back() = xout;
      }
      continue;
    }
    in.push_back(xin);
    out.push_back(xout);
  }
  return PiecewiseLinearMap(std::move(in), std::move(out));
}

}  // namespace baryflow
