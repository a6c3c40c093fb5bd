#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "baryflow/flow.hpp"
#include "baryflow/metrics.hpp"

namespace baryflow::cli {

// Run configuration parsed from a key = value file. n_train/n_test are
// per-class sample counts for the generated datasets.
struct RunConfig {
  std::string dataset = "moons";  // moons|circles|random_pattern|gaussians|csv
  std::string train_csv, test_csv;
  int k = 0;           // 0 picks the dataset's default
  double noise = -1.0;  // negative picks the dataset's default
  int n_train = 2000;
  int n_test = 1000;
  std::uint64_t seed = 42;
  std::vector<double> weights;  // empty means uniform
  std::vector<LayerConfig> schedule;
  SinkhornConfig sinkhorn;
  bool trace = false;
};

// Schedule grammar: entries separated by ';', each
//   kind | kind(key=value, ...) | kind(...) xN
// e.g. "gaussian; nb(frame=mswd, m=2) x15; tree(max_leaf_nodes=10)".
std::vector<LayerConfig> parse_schedule(const std::string& text);

RunConfig parse_run_config(const std::string& text, const std::string& origin);
RunConfig load_run_config(const std::string& path);

struct CliArgs {
  std::string command;
  std::string config_path;
  std::string out;
  std::string model_path;
  std::string input_path;
  std::string test_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  double eps = 0.0;
  bool eps_set = false;
  int max_iter = 0;
  bool max_iter_set = false;
  int from_label = 0;
  int to_label = 0;
  int class_label = 0;
  bool class_set = false;
  bool inverse = false;
};

// Executes one subcommand; throws ConfigError/DataError/NumericError.
void run_cli(const CliArgs& args);

}  // namespace baryflow::cli
