#include "baryflow/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>

#include "baryflow/datasets.hpp"
#include "baryflow/serialize.hpp"

namespace baryflow::cli {

namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& s, const std::string& what) {
  double v;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ConfigError(what + ": '" + s + "' is not a number");
  return v;
}

long parse_int(const std::string& s, const std::string& what) {
  long v;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ConfigError(what + ": '" + s + "' is not an integer");
  return v;
}

bool parse_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(what + ": '" + s + "' is not a boolean");
}

void apply_layer_param(LayerConfig& cfg, const std::string& key, const std::string& value,
                       const std::string& where) {
  const std::string what = where + " parameter '" + key + "'";
  if (cfg.kind == "gaussian") {
    if (key == "lambda_reg")
      cfg.gaussian.lambda_reg = parse_double(value, what);
    else if (key == "tol")
      cfg.gaussian.fixed_point.tol = parse_double(value, what);
    else if (key == "max_iter")
      cfg.gaussian.fixed_point.max_iter = static_cast<int>(parse_int(value, what));
    else
      throw ConfigError(where + ": unknown gaussian parameter '" + key + "'");
  } else if (cfg.kind == "nb") {
    if (key == "frame") {
      if (value == "mswd")
        cfg.nb.frame = FrameSource::mswd;
      else if (value == "random")
        cfg.nb.frame = FrameSource::random;
      else if (value == "identity")
        cfg.nb.frame = FrameSource::identity;
      else
        throw ConfigError(what + ": expected mswd|random|identity, got '" + value + "'");
    } else if (key == "m")
      cfg.nb.m = static_cast<int>(parse_int(value, what));
    else if (key == "p")
      cfg.nb.opt.p = parse_double(value, what);
    else if (key == "bins")
      cfg.nb.fit.bins = static_cast<int>(parse_int(value, what));
    else if (key == "alpha")
      cfg.nb.fit.alpha = parse_double(value, what);
    else if (key == "std_floor")
      cfg.nb.fit.std_floor = parse_double(value, what);
    else if (key == "opt_max_iter")
      cfg.nb.opt.max_iter = static_cast<int>(parse_int(value, what));
    else if (key == "opt_tol")
      cfg.nb.opt.tol = parse_double(value, what);
    else if (key == "step")
      cfg.nb.opt.step0 = parse_double(value, what);
    else if (key == "shrink")
      cfg.nb.opt.shrink = parse_double(value, what);
    else if (key == "backtracks")
      cfg.nb.opt.max_backtracks = static_cast<int>(parse_int(value, what));
    else
      throw ConfigError(where + ": unknown nb parameter '" + key + "'");
  } else if (cfg.kind == "tree") {
    if (key == "max_leaf_nodes")
      cfg.tree.fit.max_leaf_nodes = static_cast<int>(parse_int(value, what));
    else if (key == "min_samples_leaf")
      cfg.tree.fit.min_samples_leaf = static_cast<int>(parse_int(value, what));
    else if (key == "kappa")
      cfg.tree.kappa = parse_double(value, what);
    else if (key == "unit_interval")
      cfg.tree.unit_interval = parse_bool(value, what);
    else if (key == "node_weights") {
      if (value == "class_weighted")
        cfg.tree.node_weights = TreeNodeWeighting::class_weighted;
      else if (value == "node_mass")
        cfg.tree.node_weights = TreeNodeWeighting::node_mass;
      else
        throw ConfigError(what + ": expected class_weighted|node_mass, got '" + value + "'");
    } else
      throw ConfigError(where + ": unknown tree parameter '" + key + "'");
  }
}

}  // namespace

std::vector<LayerConfig> parse_schedule(const std::string& text) {
  std::vector<LayerConfig> out;
  std::stringstream ss(text);
  std::string entry;
  int entry_no = 0;
  while (std::getline(ss, entry, ';')) {
    entry = trim(entry);
    if (entry.empty()) continue;
    ++entry_no;
    const std::string where = "schedule entry " + std::to_string(entry_no);

    std::string params, rest;
    std::string head = entry;
    const auto open = entry.find('(');
    if (open != std::string::npos) {
      const auto close = entry.find(')', open);
      if (close == std::string::npos) throw ConfigError(where + ": missing ')'");
      head = trim(entry.substr(0, open));
      params = entry.substr(open + 1, close - open - 1);
      rest = trim(entry.substr(close + 1));
    } else {
      const auto sp = entry.find_first_of(" \tx*", 1);
      if (sp != std::string::npos && (entry[sp] == 'x' || entry[sp] == '*') &&
          sp + 1 < entry.size() && std::isdigit(static_cast<unsigned char>(entry[sp + 1]))) {
        head = trim(entry.substr(0, sp));
        rest = trim(entry.substr(sp));
      } else if (sp != std::string::npos && (entry[sp] == ' ' || entry[sp] == '\t')) {
        head = trim(entry.substr(0, sp));
        rest = trim(entry.substr(sp));
      }
    }

    int repeat = 1;
    if (!rest.empty()) {
      if (rest[0] == 'x' || rest[0] == '*') {
        repeat = static_cast<int>(parse_int(trim(rest.substr(1)), where + " repeat count"));
      } else {
        throw ConfigError(where + ": unexpected trailing '" + rest + "'");
      }
      if (repeat < 1) throw ConfigError(where + ": repeat count must be at least 1");
    }

    LayerConfig cfg;
    cfg.kind = head;
    cfg.validate();
    if (!params.empty()) {
      std::stringstream ps(params);
      std::string kv;
      while (std::getline(ps, kv, ',')) {
        kv = trim(kv);
        if (kv.empty()) continue;
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw ConfigError(where + ": parameter '" + kv + "' needs key=value form");
        apply_layer_param(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)), where);
      }
    }
    for (int r = 0; r < repeat; ++r) out.push_back(cfg);
  }
  if (out.empty()) throw ConfigError("schedule is empty");
  return out;
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  bool have_schedule = false;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + " line " + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "dataset") {
      if (value != "moons" && value != "circles" && value != "random_pattern" &&
          value != "gaussians" && value != "csv")
        throw ConfigError(where + ": unknown dataset '" + value + "'");
      cfg.dataset = value;
    } else if (key == "train_csv") {
      cfg.train_csv = value;
    } else if (key == "test_csv") {
      cfg.test_csv = value;
    } else if (key == "k") {
      cfg.k = static_cast<int>(parse_int(value, where));
    } else if (key == "noise") {
      cfg.noise = parse_double(value, where);
    } else if (key == "n_train") {
      cfg.n_train = static_cast<int>(parse_int(value, where));
    } else if (key == "n_test") {
      cfg.n_test = static_cast<int>(parse_int(value, where));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(value, where));
    } else if (key == "weights") {
      cfg.weights.clear();
      if (value != "uniform") {
        std::stringstream ws(value);
        std::string wv;
        while (std::getline(ws, wv, ',')) cfg.weights.push_back(parse_double(trim(wv), where));
      }
    } else if (key == "schedule") {
      cfg.schedule = parse_schedule(value);
      have_schedule = true;
    } else if (key == "eps") {
      cfg.sinkhorn.eps = parse_double(value, where);
    } else if (key == "sinkhorn_max_iter") {
      cfg.sinkhorn.max_iter = static_cast<int>(parse_int(value, where));
    } else if (key == "sinkhorn_tol") {
      cfg.sinkhorn.marginal_tol = parse_double(value, where);
    } else if (key == "trace") {
      cfg.trace = parse_bool(value, where);
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  if (cfg.dataset == "csv" && cfg.train_csv.empty())
    throw ConfigError(origin + ": dataset = csv needs train_csv");
  (void)have_schedule;  // commands that fit check for a schedule themselves
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path);
}

namespace {

GeneratorSpec spec_from(const RunConfig& cfg) {
  GeneratorSpec spec;
  if (cfg.dataset == "moons") {
    spec = GeneratorSpec::moons(cfg.noise < 0.0 ? 0.05 : cfg.noise);
  } else if (cfg.dataset == "circles") {
    spec = GeneratorSpec::circles(cfg.noise < 0.0 ? 0.05 : cfg.noise);
  } else if (cfg.dataset == "random_pattern") {
    spec = GeneratorSpec::random_pattern(cfg.k == 0 ? 2 : cfg.k,
                                         cfg.noise < 0.0 ? 0.5 : cfg.noise);
    if (spec.noise <= 0.0) throw ConfigError("random_pattern needs positive noise");
  } else if (cfg.dataset == "gaussians") {
    spec = GeneratorSpec::gaussians();
    if (cfg.k != 0 && cfg.k != spec.k)
      throw ConfigError("gaussians is a fixed 3-class dataset");
  } else {
    throw ConfigError("dataset '" + cfg.dataset + "' cannot be generated");
  }
  if (cfg.k != 0 && (cfg.dataset == "moons" || cfg.dataset == "circles") && cfg.k != 2)
    throw ConfigError(cfg.dataset + " is a fixed 2-class dataset");
  return spec;
}

struct LoadedData {
  LabeledDataset train;
  LabeledDataset test;
  bool test_is_train = false;
};

LoadedData load_data(const RunConfig& cfg) {
  LoadedData out;
  if (cfg.dataset == "csv") {
    out.train = load_csv(cfg.train_csv);
    if (!cfg.test_csv.empty()) {
      out.test = load_csv(cfg.test_csv);
    } else {
      out.test = out.train;
      out.test_is_train = true;
    }
  } else {
    const GeneratorSpec spec = spec_from(cfg);
    const Rng root(cfg.seed);
    Rng train_rng = root.substream("dataset/train");
    Rng test_rng = root.substream("dataset/test");
    out.train = generate(spec, cfg.n_train, train_rng);
    out.test = generate(spec, cfg.n_test, test_rng);
  }
  return out;
}

WeightVector weights_for(const RunConfig& cfg, int k) {
  if (cfg.weights.empty()) return WeightVector::uniform(k);
  if (static_cast<int>(cfg.weights.size()) != k)
    throw ConfigError("config has " + std::to_string(cfg.weights.size()) + " weights for " +
                      std::to_string(k) + " classes");
  return WeightVector(cfg.weights);
}

RunConfig config_with_overrides(const CliArgs& args, bool need_schedule) {
  if (args.config_path.empty()) throw ConfigError("this command needs --config");
  RunConfig cfg = load_run_config(args.config_path);
  if (args.seed_set) cfg.seed = args.seed;
  if (args.eps_set) cfg.sinkhorn.eps = args.eps;
  if (args.max_iter_set) cfg.sinkhorn.max_iter = args.max_iter;
  cfg.sinkhorn.threads = args.threads;
  if (need_schedule && cfg.schedule.empty())
    throw ConfigError(args.config_path + ": this command needs a schedule");
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::string metrics_csv(const std::vector<TracePoint>& points) {
  std::string s = "layer,wd,tc,fit_ms\n";
  char buf[160];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.3f\n", p.layer, p.wd, p.tc, p.fit_ms);
    s += buf;
  }
  return s;
}

std::string out_dir(const CliArgs& args) {
  const std::string dir = args.out.empty() ? "." : args.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

void cmd_generate(const CliArgs& args) {
  const RunConfig cfg = config_with_overrides(args, false);
  if (cfg.dataset == "csv") throw ConfigError("generate needs a synthetic dataset kind");
  const LoadedData data = load_data(cfg);
  const std::string dir = out_dir(args);
  write_csv(dir + "/train.csv", data.train);
  write_csv(dir + "/test.csv", data.test);
  std::printf("wrote %s/train.csv and %s/test.csv (%d classes, %d + %d per class)\n",
              dir.c_str(), dir.c_str(), data.train.k(), cfg.n_train, cfg.n_test);
}

void cmd_fit(const CliArgs& args, bool trace_only) {
  const RunConfig cfg = config_with_overrides(args, true);
  const LoadedData data = load_data(cfg);
  const WeightVector w = weights_for(cfg, data.train.k());
  const std::string dir = out_dir(args);

  FlowModel model;
  std::vector<TracePoint> points;
  if (cfg.trace || trace_only) {
    points = convergence_trace(data.train, data.test, w, cfg.schedule, cfg.seed, cfg.sinkhorn,
                               &model);
  } else {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    model = fit_flow(data.train, w, cfg.schedule, cfg.seed);
    const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    points.push_back(TracePoint{static_cast<int>(model.layers.size()),
                                pairwise_flip_wd(data.test, model, cfg.sinkhorn),
                                transportation_cost(data.test, model, w), ms});
  }

  if (trace_only) {
    write_text(dir + "/trace.csv", metrics_csv(points));
    std::printf("wrote %s/trace.csv (%zu rows)\n", dir.c_str(), points.size());
  } else {
    save_model(model, dir + "/model.json");
    write_text(dir + "/metrics.csv", metrics_csv(points));
    const TracePoint& last = points.back();
    std::printf("fitted %zu layers; wd=%.6g tc=%.6g%s\n", model.layers.size(), last.wd, last.tc,
                data.test_is_train ? " (metrics on training data)" : "");
    std::printf("wrote %s/model.json and %s/metrics.csv\n", dir.c_str(), dir.c_str());
  }
}

void cmd_transform(const CliArgs& args) {
  if (args.model_path.empty()) throw ConfigError("transform needs --model");
  if (args.input_path.empty()) throw ConfigError("transform needs --in");
  const FlowModel model = load_model(args.model_path);
  LabeledDataset data = load_csv(args.input_path);
  for (auto& cls : data.classes) {
    const int j = model.class_index(args.class_set ? args.class_label : cls.class_id);
    cls.data = args.inverse ? inverse_transform(model, j, cls.data)
                            : transform(model, j, cls.data);
  }
  const std::string out = args.out.empty() ? "transformed.csv" : args.out;
  write_text(out, to_csv(data));
  std::printf("wrote %s\n", out.c_str());
}

void cmd_flip(const CliArgs& args) {
  if (args.model_path.empty()) throw ConfigError("flip needs --model");
  if (args.input_path.empty()) throw ConfigError("flip needs --in");
  const FlowModel model = load_model(args.model_path);
  const LabeledDataset data = load_csv(args.input_path);
  const int from = model.class_index(args.from_label);
  const int to = model.class_index(args.to_label);

  LabeledDataset flipped;
  bool found = false;
  for (const auto& cls : data.classes) {
    if (cls.class_id != args.from_label) continue;
    found = true;
    flipped.classes.push_back({flip(model, from, to, cls.data), args.to_label});
  }
  if (!found)
    throw DataError(args.input_path + " has no rows with label " +
                    std::to_string(args.from_label));
  const std::string out = args.out.empty() ? "flipped.csv" : args.out;
  write_text(out, to_csv(flipped));
  std::printf("wrote %s\n", out.c_str());
}

void cmd_eval(const CliArgs& args) {
  if (args.model_path.empty()) throw ConfigError("eval needs --model");
  if (args.test_path.empty() && args.input_path.empty())
    throw ConfigError("eval needs --test (or --in)");
  const FlowModel model = load_model(args.model_path);
  const LabeledDataset test = load_csv(args.test_path.empty() ? args.input_path : args.test_path);
  SinkhornConfig scfg;
  if (args.eps_set) scfg.eps = args.eps;
  if (args.max_iter_set) scfg.max_iter = args.max_iter;
  scfg.threads = args.threads;

  std::vector<TracePoint> points{
      TracePoint{static_cast<int>(model.layers.size()), pairwise_flip_wd(test, model, scfg),
                 transportation_cost(test, model, model.weights), 0.0}};
  const std::string out = args.out.empty() ? "metrics.csv" : args.out;
  write_text(out, metrics_csv(points));
  std::printf("layers=%d wd=%.6g tc=%.6g\n", points[0].layer, points[0].wd, points[0].tc);
}

void cmd_plot_data(const CliArgs& args) {
  if (args.input_path.empty()) throw ConfigError("plot-data needs --in");
  const LabeledDataset data = load_csv(args.input_path);
  const std::string out = args.out.empty() ? "plot.svg" : args.out;
  write_text(out, scatter_svg(data));
  std::printf("wrote %s\n", out.c_str());
}

}  // namespace

void run_cli(const CliArgs& args) {
  if (args.command == "generate") {
    cmd_generate(args);
  } else if (args.command == "fit") {
    cmd_fit(args, false);
  } else if (args.command == "trace") {
    cmd_fit(args, true);
  } else if (args.command == "transform") {
    cmd_transform(args);
  } else if (args.command == "flip") {
    cmd_flip(args);
  } else if (args.command == "eval") {
    cmd_eval(args);
  } else if (args.command == "plot-data") {
    cmd_plot_data(args);
  } else {
    throw ConfigError("unknown command '" + args.command + "'");
  }
}

}  // namespace baryflow::cli
