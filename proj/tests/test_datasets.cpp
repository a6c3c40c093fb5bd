#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "baryflow/datasets.hpp"

using namespace baryflow;

TEST_CASE("zero noise moons lie on their arcs") {
  Rng rng(101);
  const LabeledDataset data = generate(GeneratorSpec::moons(0.0), 50, rng);
  REQUIRE(data.k() == 2);
  REQUIRE(data.classes[0].data.rows() == 50);
  CHECK(data.classes[0].class_id == 0);
  CHECK(data.classes[1].class_id == 1);
  for (Eigen::Index i = 0; i < 50; ++i) {
    const double r0 = data.classes[0].data.row(i).norm();
    CHECK(r0 == doctest::Approx(1.0).epsilon(1e-12));
    const Eigen::RowVector2d c(1.0, 0.5);
    const double r1 = (data.classes[1].data.row(i) - c).norm();
    CHECK(r1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(data.classes[0].data(i, 1) >= -1e-12);  // upper arc
    CHECK(data.classes[1].data(i, 1) <= 0.5 + 1e-12);
  }
}

TEST_CASE("zero noise circles have radii one and one half") {
  Rng rng(102);
  const LabeledDataset data = generate(GeneratorSpec::circles(0.0), 64, rng);
  for (Eigen::Index i = 0; i < 64; ++i) {
    CHECK(data.classes[0].data.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(data.classes[1].data.row(i).norm() == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("noise perturbs but preserves shape roughly") {
  Rng rng(103);
  const LabeledDataset data = generate(GeneratorSpec::circles(0.02), 500, rng);
  double mean_r = 0.0;
  for (Eigen::Index i = 0; i < 500; ++i) mean_r += data.classes[0].data.row(i).norm();
  mean_r /= 500;
  CHECK(mean_r == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("generation is reproducible from the rng") {
  Rng a(7), b(7);
  const LabeledDataset x = generate(GeneratorSpec::moons(0.1), 30, a);
  const LabeledDataset y = generate(GeneratorSpec::moons(0.1), 30, b);
  for (int j = 0; j < 2; ++j) CHECK(x.classes[j].data == y.classes[j].data);
}

TEST_CASE("random pattern respects k and rejects bad noise") {
  Rng rng(104);
  const LabeledDataset data = generate(GeneratorSpec::random_pattern(4, 0.3), 40, rng);
  REQUIRE(data.k() == 4);
  for (int j = 0; j < 4; ++j) {
    CHECK(data.classes[j].class_id == j);
    CHECK(data.classes[j].data.rows() == 40);
    CHECK(data.classes[j].data.cols() == 2);
  }
  Rng rng2(105);
  CHECK_THROWS_AS(generate(GeneratorSpec::random_pattern(2, 0.0), 10, rng2), ConfigError);
  CHECK_THROWS_AS(generate(GeneratorSpec::random_pattern(1, 0.5), 10, rng2), ConfigError);
}

TEST_CASE("gaussians dataset matches its parameters in the large sample limit") {
  Rng rng(106);
  const GeneratorSpec spec = GeneratorSpec::gaussians();
  REQUIRE(spec.k == 3);
  const int n = 20000;
  const LabeledDataset data = generate(spec, n, rng);
  for (int j = 0; j < 3; ++j) {
    const Eigen::RowVectorXd mean = data.classes[j].data.colwise().mean();
    for (int c = 0; c < 2; ++c) {
      const double sigma = std::sqrt(spec.covs[j](c, c) / n);
      CHECK(std::abs(mean(c) - spec.means[j](c)) < 4.0 * sigma);
    }
    const Eigen::MatrixXd centered = data.classes[j].data.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / n;
    CHECK((cov - spec.covs[j]).cwiseAbs().maxCoeff() < 0.05);
  }
}

TEST_CASE("csv writing round trips bitwise") {
  Rng rng(107);
  const LabeledDataset data = generate(GeneratorSpec::moons(0.07), 40, rng);
  const std::string text = to_csv(data);
  const LabeledDataset back = parse_csv(text, "mem");
  REQUIRE(back.k() == 2);
  for (int j = 0; j < 2; ++j) {
    CHECK(back.classes[j].class_id == data.classes[j].class_id);
    CHECK(back.classes[j].data == data.classes[j].data);  // exact doubles
  }
  CHECK(to_csv(back) == text);
}

TEST_CASE("csv accepts a missing header and groups labels in order") {
  const std::string text = "1.5,2.5,1\n0.5,0.25,0\n2.5,3.5,1\n";
  const LabeledDataset data = parse_csv(text, "mem");
  REQUIRE(data.k() == 2);
  CHECK(data.classes[0].class_id == 0);
  CHECK(data.classes[0].data.rows() == 1);
  CHECK(data.classes[1].data.rows() == 2);
  CHECK(data.classes[1].data(0, 0) == 1.5);
  CHECK(data.classes[1].data(1, 1) == 3.5);
}

TEST_CASE("csv errors carry the line and column") {
  const std::string bad_number = "x0,x1,label\n1.0,oops,0\n";
  try {
    parse_csv(bad_number, "input.csv");
    FAIL("expected a data error");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("input.csv line 2") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }

  const std::string ragged = "1.0,2.0,0\n1.0,0\n";
  try {
    parse_csv(ragged, "input.csv");
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_csv("", "input.csv"), DataError);
  CHECK_THROWS_AS(parse_csv("x0,x1,label\n", "input.csv"), DataError);
}

TEST_CASE("scatter svg contains one marker per sample") {
  Rng rng(108);
  const LabeledDataset data = generate(GeneratorSpec::circles(0.05), 25, rng);
  const std::string svg = scatter_svg(data);
  CHECK(svg.find("<svg") != std::string::npos);
  size_t count = 0, at = 0;
  while ((at = svg.find("<circle", at)) != std::string::npos) {
    ++count;
    at += 7;
  }
  CHECK(count == 50);
}
