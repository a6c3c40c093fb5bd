// Command line front end. Exit codes: 0 ok, 2 bad configuration or
// arguments, 3 bad data, 4 numerical failure.
#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "baryflow/cli.hpp"
#include "baryflow/types.hpp"

namespace {

using baryflow::cli::CliArgs;

void add_common(CLI::App* cmd, CliArgs& args) {
  cmd->add_option("--out", args.out, "Output path");
  cmd->add_option("--threads", args.threads, "Sinkhorn worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--eps", args.eps, "Sinkhorn regularization")
      ->check(CLI::PositiveNumber)
      ->each([&args](const std::string&) { args.eps_set = true; });
  cmd->add_option("--max-iter", args.max_iter, "Sinkhorn iteration cap")
      ->check(CLI::PositiveNumber)
      ->each([&args](const std::string&) { args.max_iter_set = true; });
}

void add_config(CLI::App* cmd, CliArgs& args, bool required) {
  auto* opt = cmd->add_option("--config", args.config_path, "Run configuration file");
  if (required) opt->required();
  cmd->add_option("--seed", args.seed, "Override the config seed")
      ->each([&args](const std::string&) { args.seed_set = true; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimates invertible flows to a shared barycenter latent space"};
  app.require_subcommand(1);

  CliArgs args;

  auto* generate = app.add_subcommand("generate", "Write train/test CSVs for a synthetic dataset");
  add_config(generate, args, true);
  generate->add_option("--out", args.out, "Output directory");

  auto* fit = app.add_subcommand("fit", "Fit a flow and report metrics");
  add_config(fit, args, true);
  add_common(fit, args);

  auto* trace = app.add_subcommand("trace", "Fit while logging metrics after every layer");
  add_config(trace, args, true);
  add_common(trace, args);

  auto* transform = app.add_subcommand("transform", "Map CSV samples to or from the latent space");
  transform->add_option("--model", args.model_path, "Model JSON")->required();
  transform->add_option("--in", args.input_path, "Input CSV")->required();
  transform->add_option("--class", args.class_label, "Treat every row as this class label")
      ->each([&args](const std::string&) { args.class_set = true; });
  transform->add_flag("--inverse", args.inverse, "Apply the inverse map");
  transform->add_option("--out", args.out, "Output CSV");

  auto* flip = app.add_subcommand("flip", "Re-express one class's samples as another class");
  flip->add_option("--model", args.model_path, "Model JSON")->required();
  flip->add_option("--in", args.input_path, "Input CSV")->required();
  flip->add_option("--from", args.from_label, "Source class label")->required();
  flip->add_option("--to", args.to_label, "Target class label")->required();
  flip->add_option("--out", args.out, "Output CSV");

  auto* eval = app.add_subcommand("eval", "Score a fitted model on labeled data");
  eval->add_option("--model", args.model_path, "Model JSON")->required();
  eval->add_option("--test", args.test_path, "Evaluation CSV");
  eval->add_option("--in", args.input_path, "Alias for --test");
  add_common(eval, args);

  auto* plot = app.add_subcommand("plot-data", "Render a labeled CSV as an SVG scatter plot");
  plot->add_option("--in", args.input_path, "Input CSV")->required();
  plot->add_option("--out", args.out, "Output SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  args.command = app.get_subcommands().front()->get_name();
  try {
    baryflow::cli::run_cli(args);
  } catch (const baryflow::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const baryflow::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
