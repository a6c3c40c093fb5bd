#include "baryflow/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>

namespace baryflow {

namespace {

void add_noise(Eigen::MatrixXd& X, double noise, Rng& rng) {
  if (noise <= 0.0) return;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index c = 0; c < X.cols(); ++c) X(i, c) += noise * rng.normal();
}

Eigen::MatrixXd gaussian_block(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, int n,
                               Rng& rng) {
  const Eigen::Index d = mean.size();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericError("generator covariance is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd z(d);
    for (Eigen::Index c = 0; c < d; ++c) z[c] = rng.normal();
    X.row(i) = (mean + L * z).transpose();
  }
  return X;
}

}  // namespace

GeneratorSpec GeneratorSpec::moons(double noise) {
  GeneratorSpec s;
  s.kind = DatasetKind::moons;
  s.k = 2;
  s.noise = noise;
  return s;
}

GeneratorSpec GeneratorSpec::circles(double noise) {
  GeneratorSpec s;
  s.kind = DatasetKind::circles;
  s.k = 2;
  s.noise = noise;
  return s;
}

GeneratorSpec GeneratorSpec::random_pattern(int k, double noise) {
  GeneratorSpec s;
  s.kind = DatasetKind::random_pattern;
  s.k = k;
  s.noise = noise;
  return s;
}

GeneratorSpec GeneratorSpec::gaussians() {
  GeneratorSpec s;
  s.kind = DatasetKind::gaussians;
  s.k = 3;
  s.noise = 0.0;
  s.means = {Eigen::Vector2d(-2.0, -1.0), Eigen::Vector2d(2.0, -1.0), Eigen::Vector2d(0.0, 2.0)};
  Eigen::Matrix2d c0, c1, c2;
  c0 << 1.0, 0.4, 0.4, 0.8;
  c1 << 0.7, -0.3, -0.3, 1.1;
  c2 << 0.5, 0.1, 0.1, 0.9;
  s.covs = {c0, c1, c2};
  return s;
}

LabeledDataset generate(const GeneratorSpec& spec, int n_per_class, Rng& rng) {
  if (n_per_class < 1) throw ConfigError("n_per_class must be at least 1");
  LabeledDataset out;
  switch (spec.kind) {
    case DatasetKind::moons: {
      if (spec.k != 2) throw ConfigError("moons is a two-class dataset");
      const int n = n_per_class;
      Eigen::MatrixXd a(n, 2), b(n, 2);
      for (int i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : std::numbers::pi * i / (n - 1.0);
        a(i, 0) = std::cos(t);
        a(i, 1) = std::sin(t);
        b(i, 0) = 1.0 - std::cos(t);
        b(i, 1) = 0.5 - std::sin(t);
      }
      add_noise(a, spec.noise, rng);
      add_noise(b, spec.noise, rng);
      out.classes.push_back({std::move(a), 0});
      out.classes.push_back({std::move(b), 1});
      break;
    }
    case DatasetKind::circles: {
      if (spec.k != 2) throw ConfigError("circles is a two-class dataset");
      const int n = n_per_class;
      Eigen::MatrixXd a(n, 2), b(n, 2);
      for (int i = 0; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * i / n;
        a(i, 0) = std::cos(t);
        a(i, 1) = std::sin(t);
        b(i, 0) = 0.5 * std::cos(t);
        b(i, 1) = 0.5 * std::sin(t);
      }
      add_noise(a, spec.noise, rng);
      add_noise(b, spec.noise, rng);
      out.classes.push_back({std::move(a), 0});
      out.classes.push_back({std::move(b), 1});
      break;
    }
    case DatasetKind::random_pattern: {
      if (spec.k < 2) throw ConfigError("random_pattern needs at least 2 classes");
      if (spec.noise <= 0.0) throw ConfigError("random_pattern needs positive noise");
      Rng pattern = rng.substream("pattern");
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
      for (int j = 0; j < spec.k; ++j) {
        const int n1 = n_per_class / 2 + n_per_class % 2;
        const int n2 = n_per_class - n1;
        Eigen::MatrixXd X(n_per_class, 2);
        for (int comp = 0; comp < 2; ++comp) {
          Eigen::Vector2d mean;
          mean << 6.0 * pattern.next_double() - 3.0, 6.0 * pattern.next_double() - 3.0;
          const int nc = comp == 0 ? n1 : n2;
          if (nc == 0) continue;
          const Eigen::MatrixXd block =
              gaussian_block(mean, spec.noise * spec.noise * I, nc, rng);
          X.middleRows(comp == 0 ? 0 : n1, nc) = block;
        }
        out.classes.push_back({std::move(X), j});
      }
      break;
    }
    case DatasetKind::gaussians: {
      if (spec.means.size() != spec.covs.size() || spec.means.empty())
        throw ConfigError("gaussians needs matching means and covariances");
      if (spec.k != static_cast<int>(spec.means.size()))
        throw ConfigError("gaussians k does not match the parameter count");
      for (int j = 0; j < spec.k; ++j) {
        out.classes.push_back(
            {gaussian_block(spec.means[j], spec.covs[j], n_per_class, rng), j});
      }
      break;
    }
  }
  out.validate(2);
  return out;
}

namespace {

void append_double(std::string& s, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  s.append(buf, res.ptr);
}

}  // namespace

std::string to_csv(const LabeledDataset& data) {
  data.validate(1);
  const Eigen::Index d = data.dim();
  std::string s;
  for (Eigen::Index c = 0; c < d; ++c) {
    s += "x" + std::to_string(c) + ",";
  }
  s += "label\n";
  for (const auto& cls : data.classes) {
    for (Eigen::Index i = 0; i < cls.n(); ++i) {
      for (Eigen::Index c = 0; c < d; ++c) {
        append_double(s, cls.data(i, c));
        s += ',';
      }
      s += std::to_string(cls.class_id);
      s += '\n';
    }
  }
  return s;
}

LabeledDataset parse_csv(const std::string& text, const std::string& origin) {
  std::vector<std::pair<int, std::vector<double>>> rows;  // label, features
  size_t pos = 0;
  int line_no = 0;
  Eigen::Index d = -1;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    size_t f = 0;
    while (true) {
      size_t comma = line.find(',', f);
      fields.push_back(line.substr(f, comma == std::string_view::npos ? comma : comma - f));
      if (comma == std::string_view::npos) break;
      f = comma + 1;
    }
    if (fields.size() < 2)
      throw DataError(origin + " line " + std::to_string(line_no) +
                      ": need at least one feature and a label");

    // A header is allowed once, detected by a non-numeric first field.
    double probe;
    const auto pr = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), probe);
    if (pr.ec != std::errc() && line_no == 1 && rows.empty()) continue;

    std::vector<double> feats(fields.size() - 1);
    for (size_t c = 0; c + 1 < fields.size(); ++c) {
      const auto r =
          std::from_chars(fields[c].data(), fields[c].data() + fields[c].size(), feats[c]);
      if (r.ec != std::errc() || r.ptr != fields[c].data() + fields[c].size())
        throw DataError(origin + " line " + std::to_string(line_no) + " column " +
                        std::to_string(c + 1) + ": '" + std::string(fields[c]) +
                        "' is not a number");
    }
    const auto& lf = fields.back();
    int label;
    const auto lr = std::from_chars(lf.data(), lf.data() + lf.size(), label);
    if (lr.ec != std::errc() || lr.ptr != lf.data() + lf.size())
      throw DataError(origin + " line " + std::to_string(line_no) + " column " +
                      std::to_string(fields.size()) + ": label '" + std::string(lf) +
                      "' is not an integer");
    if (d < 0) d = static_cast<Eigen::Index>(feats.size());
    if (static_cast<Eigen::Index>(feats.size()) != d)
      throw DataError(origin + " line " + std::to_string(line_no) + ": expected " +
                      std::to_string(d) + " features, got " + std::to_string(feats.size()));
    rows.emplace_back(label, std::move(feats));
  }
  if (rows.empty()) throw DataError(origin + ": no data rows");

  std::map<int, std::vector<size_t>> by_label;
  for (size_t i = 0; i < rows.size(); ++i) by_label[rows[i].first].push_back(i);
  LabeledDataset out;
  for (const auto& [label, idx] : by_label) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()), d);
    for (size_t i = 0; i < idx.size(); ++i)
      for (Eigen::Index c = 0; c < d; ++c)
        X(static_cast<Eigen::Index>(i), c) = rows[idx[i]].second[static_cast<size_t>(c)];
    out.classes.push_back({std::move(X), label});
  }
  out.validate(1);
  return out;
}

void write_csv(const std::string& path, const LabeledDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << to_csv(data);
  if (!out) throw DataError("failed writing '" + path + "'");
}

LabeledDataset load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path);
}

std::string scatter_svg(const LabeledDataset& data, int width, int height) {
  data.validate(1);
  if (data.dim() < 2) throw DataError("scatter plot needs at least 2 dimensions");
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& c : data.classes) {
    xmin = std::min(xmin, c.data.col(0).minCoeff());
    xmax = std::max(xmax, c.data.col(0).maxCoeff());
    ymin = std::min(ymin, c.data.col(1).minCoeff());
    ymax = std::max(ymax, c.data.col(1).maxCoeff());
  }
  const double xpad = std::max(1e-9, 0.05 * (xmax - xmin));
  const double ypad = std::max(1e-9, 0.05 * (ymax - ymin));
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;

  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (size_t j = 0; j < data.classes.size(); ++j) {
    const auto& cls = data.classes[j];
    const char* color = palette[j % 8];
    svg << "<g fill=\"" << color << "\" fill-opacity=\"0.7\">\n";
    for (Eigen::Index i = 0; i < cls.n(); ++i) {
      const double px = (cls.data(i, 0) - xmin) / (xmax - xmin) * width;
      const double py = height - (cls.data(i, 1) - ymin) / (ymax - ymin) * height;
      svg << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"2\"/>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace baryflow
