#include "snnopt/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "snnopt/checkpoint.hpp"
#include "snnopt/cost_models.hpp"
#include "snnopt/dse.hpp"
#include "snnopt/error.hpp"
#include "snnopt/event_io.hpp"
#include "snnopt/quantizer.hpp"
#include "snnopt/stbp.hpp"

namespace snnopt {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string flag_for(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
}

// --config FILE (a run.json or any flat object of option values) becomes the
// equivalent flags; flags given explicitly take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  const json doc = read_json_file(path);
  if (!doc.is_object()) throw Error(ErrorCode::InvalidArgument, path + ": config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "command" || value.is_null()) continue;
    const std::string flag = flag_for(key);
    if (has_flag(args, flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
      continue;
    }
    args.push_back(flag);
    args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
  }
  return args;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

fs::path make_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out);
  return out;
}

void write_run_json(const fs::path& dir, const std::string& command, json options) {
  options["command"] = command;
  write_text(dir / "run.json", options.dump(2) + "\n");
}

// Inline JSON object or a path to a JSON file.
json inline_or_file(const std::string& value) {
  if (value.find('{') != std::string::npos) {
    try {
      return json::parse(value);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("inline JSON: ") + e.what());
    }
  }
  return read_json_file(value);
}

const std::map<std::string, WindowMode> kWindowModes{{"per_sample", WindowMode::PerSample},
                                                     {"fixed_center", WindowMode::FixedCenter}};

struct DataOptions {
  std::string data;  // dataset directory; synthetic when empty
  int classes = 2;
  int train_per_class = 100;
  int test_per_class = 50;
  std::uint64_t data_seed = 0;

  void add(CLI::App* app) {
    app->add_option("--data", data, "Dataset directory with manifest.json (synthetic data when omitted)");
    app->add_option("--classes", classes, "Synthetic classes")->check(CLI::Range(1, 2));
    app->add_option("--train-per-class", train_per_class, "Synthetic training samples per class")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--test-per-class", test_per_class, "Synthetic test samples per class")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--data-seed", data_seed, "Synthetic dataset seed");
  }

  void to(json& j) const {
    if (!data.empty()) {
      j["data"] = data;
      return;
    }
    j["classes"] = classes;
    j["train_per_class"] = train_per_class;
    j["test_per_class"] = test_per_class;
    j["data_seed"] = data_seed;
  }

  std::vector<EventSample> load(std::string_view split, std::size_t workers) const {
    if (!data.empty()) return load_dataset(data, split, workers);
    SyntheticDatasetSpec spec;
    spec.classes = classes;
    spec.train_per_class = train_per_class;
    spec.test_per_class = test_per_class;
    spec.seed = data_seed;
    return synthetic_split(spec, split);
  }
};

struct LifOptions {
  double v_threshold = LifParams{}.v_threshold;
  double leak = LifParams{}.leak;
  std::string reset = "zero";

  void add(CLI::App* app) {
    app->add_option("--v-threshold", v_threshold, "LIF firing threshold");
    app->add_option("--leak", leak, "LIF leak factor in [0, 1)");
    app->add_option("--reset", reset, "Reset mode")->check(CLI::IsMember({"zero", "subtract"}));
  }

  void to(json& j) const {
    j["v_threshold"] = v_threshold;
    j["leak"] = leak;
    j["reset"] = reset;
  }

  LifParams params() const {
    LifParams p{v_threshold, leak, reset == "zero" ? ResetMode::Zero : ResetMode::Subtract};
    p.validate();
    return p;
  }
};

struct TrainOptions {
  int epochs = TrainConfig{}.epochs;
  int batch_size = TrainConfig{}.batch_size;
  double lr = TrainConfig{}.learning_rate;
  double momentum = TrainConfig{}.momentum;
  int lr_decay_epoch = TrainConfig{}.lr_decay_epoch;
  double lr_decay = TrainConfig{}.lr_decay;
  double half_width = SurrogateParams{}.half_width;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--epochs", epochs, "Training epochs")->check(CLI::NonNegativeNumber);
    app->add_option("--batch-size", batch_size, "Minibatch size")->check(CLI::PositiveNumber);
    app->add_option("--lr", lr, "Learning rate");
    app->add_option("--momentum", momentum, "SGD momentum");
    app->add_option("--lr-decay-epoch", lr_decay_epoch, "Epoch from which the learning rate is decayed");
    app->add_option("--lr-decay", lr_decay, "Learning-rate decay factor");
    app->add_option("--half-width", half_width, "Surrogate half width a");
    app->add_option("--seed", seed, "Weight-init and shuffle seed");
  }

  void to(json& j) const {
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["lr"] = lr;
    j["momentum"] = momentum;
    j["lr_decay_epoch"] = lr_decay_epoch;
    j["lr_decay"] = lr_decay;
    j["half_width"] = half_width;
    j["seed"] = seed;
  }

  TrainConfig config(int timesteps, int window, std::size_t workers) const {
    TrainConfig c;
    c.epochs = epochs;
    c.batch_size = batch_size;
    c.learning_rate = lr;
    c.momentum = momentum;
    c.lr_decay_epoch = lr_decay_epoch;
    c.lr_decay = lr_decay;
    c.surrogate.half_width = half_width;
    c.seed = seed;
    c.timesteps = timesteps;
    c.window = window;
    c.workers = workers;
    c.validate();
    return c;
  }
};

json summary_json(const EpochLog& e) {
  return {{"epoch", e.epoch}, {"train_acc", e.train_acc}, {"test_acc", e.test_acc}, {"loss", e.loss}};
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spiking-network optimization toolkit: event data, STBP training, PTQ, cost models and DSE",
               "snnopt"};
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);
  std::size_t workers = 1;
  app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  std::string config_path;
  const auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file of option values (e.g. a previous run.json)");
  };

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Generate or inspect event data");
  dataset->require_subcommand(1);
  dataset->fallthrough();
  auto* gen = dataset->add_subcommand("gen", "Write a synthetic dataset");
  int gen_classes = 2, gen_per_class = 100, gen_test_per_class = -1;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--classes", gen_classes, "Classes")->check(CLI::Range(1, 2));
  gen->add_option("--per-class", gen_per_class, "Training samples per class")->check(CLI::NonNegativeNumber);
  gen->add_option("--test-per-class", gen_test_per_class, "Test samples per class (default per-class / 2)");
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", gen_out, "Output directory")->required();
  add_config(gen);
  auto* inspect = dataset->add_subcommand("inspect", "Summarize one .dat or .csv event file");
  std::string inspect_file;
  inspect->add_option("file", inspect_file, "Event file")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a full-precision network with STBP");
  DataOptions train_data;
  LifOptions train_lif;
  TrainOptions train_opts;
  int train_timesteps = 10, train_window = 50, checkpoint_every = 0;
  std::string train_mode = "per_sample", train_out;
  train_data.add(train_cmd);
  train_lif.add(train_cmd);
  train_opts.add(train_cmd);
  train_cmd->add_option("--timesteps", train_timesteps, "Timesteps T")->check(CLI::PositiveNumber);
  train_cmd->add_option("--window", train_window, "Attention window W")->check(CLI::PositiveNumber);
  train_cmd->add_option("--window-mode", train_mode, "Window placement")->check(CLI::IsMember(kWindowModes));
  train_cmd->add_option("--checkpoint-every", checkpoint_every, "Also checkpoint every K epochs (0 = off)")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--out", train_out, "Run directory")->required();
  add_config(train_cmd);

  // quantize
  auto* quant_cmd = app.add_subcommand("quantize", "Post-training quantization of a checkpoint");
  std::string quant_ckpt, quant_rounding = "TR", quant_out;
  int quant_bits = 10;
  std::uint64_t quant_seed = 0;
  bool quant_no_bias = false;
  quant_cmd->add_option("--checkpoint", quant_ckpt, "Input checkpoint")->required();
  quant_cmd->add_option("--bits", quant_bits, "Total bits B")->check(CLI::Range(2, 32));
  quant_cmd->add_option("--rounding", quant_rounding, "Rounding")->check(CLI::IsMember({"TR", "RN", "SR"}));
  quant_cmd->add_option("--seed", quant_seed, "Stochastic-rounding seed");
  quant_cmd->add_flag("--no-bias", quant_no_bias, "Keep biases at full precision");
  quant_cmd->add_option("--out", quant_out, "Run directory")->required();
  add_config(quant_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  DataOptions eval_data;
  std::string eval_ckpt, eval_split = "test", eval_mode = "per_sample", eval_out;
  int eval_timesteps = 10;
  eval_data.add(eval_cmd);
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--timesteps", eval_timesteps, "Timesteps T")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--split", eval_split, "Dataset split")->check(CLI::IsMember({"train", "test"}));
  eval_cmd->add_option("--window-mode", eval_mode, "Window placement")->check(CLI::IsMember(kWindowModes));
  eval_cmd->add_option("--out", eval_out, "Run directory (optional)");
  add_config(eval_cmd);

  // dse
  auto* dse_cmd = app.add_subcommand("dse", "Design-space exploration over bits x timesteps x windows");
  DataOptions dse_data;
  LifOptions dse_lif;
  TrainOptions dse_train;
  std::string dse_grid, dse_constraints, dse_table, dse_policy = "within_tolerance", dse_rounding = "TR",
                        dse_mode = "per_sample", dse_constants, dse_out;
  double dse_tolerance = SelectionPolicy{}.tolerance;
  std::uint64_t dse_quant_seed = 0;
  bool dse_no_bias = false;
  dse_data.add(dse_cmd);
  dse_lif.add(dse_cmd);
  dse_train.add(dse_cmd);
  dse_cmd->add_option("--grid", dse_grid, "Grid JSON file or inline object (default: 32/16/12/10 x 20/15/10/5 x 100/50)");
  dse_cmd->add_option("--constraints", dse_constraints, "Constraints JSON file or inline object");
  dse_cmd->add_option("--accuracy-table", dse_table,
                      "Accuracy table JSON, or 'shipped' for the bundled NCARS values (live training when omitted)");
  dse_cmd->add_option("--policy", dse_policy, "Selection policy")
      ->check(CLI::IsMember({"max_accuracy", "within_tolerance"}));
  dse_cmd->add_option("--tolerance", dse_tolerance, "Accuracy slack for within_tolerance");
  dse_cmd->add_option("--rounding", dse_rounding, "PTQ rounding")->check(CLI::IsMember({"TR", "RN", "SR"}));
  dse_cmd->add_option("--quant-seed", dse_quant_seed, "Stochastic-rounding seed");
  dse_cmd->add_flag("--no-bias", dse_no_bias, "Keep biases at full precision");
  dse_cmd->add_option("--window-mode", dse_mode, "Window placement")->check(CLI::IsMember(kWindowModes));
  dse_cmd->add_option("--constants", dse_constants, "Cost constants JSON (default: shipped calibration)");
  dse_cmd->add_option("--out", dse_out, "Run directory")->required();
  add_config(dse_cmd);

  // complexity
  auto* cx_cmd = app.add_subcommand("complexity", "Print the cost report of one setting");
  int cx_window = 100, cx_timesteps = 20, cx_bits = 32;
  std::string cx_constants, cx_out;
  cx_cmd->add_option("--window", cx_window, "Window W")->required()->check(CLI::PositiveNumber);
  cx_cmd->add_option("--timestep,--timesteps", cx_timesteps, "Timesteps T")->required()->check(CLI::PositiveNumber);
  cx_cmd->add_option("--bits", cx_bits, "Weight bits B")->check(CLI::Range(2, 32));
  cx_cmd->add_option("--constants", cx_constants, "Cost constants JSON (default: shipped calibration)");
  cx_cmd->add_option("--out", cx_out, "Run directory (optional)");
  add_config(cx_cmd);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  }

  const auto constants_from = [](const std::string& path) {
    return path.empty() ? shipped_constants() : load_constants(path);
  };

  try {
    if (gen->parsed()) {
      const fs::path dir = make_out_dir(gen_out);
      SyntheticDatasetSpec spec;
      spec.classes = gen_classes;
      spec.train_per_class = gen_per_class;
      spec.test_per_class = gen_test_per_class < 0 ? gen_per_class / 2 : gen_test_per_class;
      spec.seed = gen_seed;
      write_run_json(dir, "dataset gen",
                     {{"classes", spec.classes},
                      {"per_class", spec.train_per_class},
                      {"test_per_class", spec.test_per_class},
                      {"seed", spec.seed},
                      {"out", gen_out},
                      {"workers", workers}});
      write_synthetic_dataset(dir, spec);
      out << json{{"train", spec.classes * spec.train_per_class}, {"test", spec.classes * spec.test_per_class}}.dump()
          << "\n";
    } else if (inspect->parsed()) {
      const EventSample s = read_event_file(inspect_file);
      std::size_t positive = 0;
      for (const auto& e : s.events) positive += e.polarity ? 1 : 0;
      json j = {{"file", inspect_file},
                {"events", s.events.size()},
                {"positive", positive},
                {"negative", s.events.size() - positive},
                {"width", s.sensor_width},
                {"height", s.sensor_height},
                {"duration_us", s.duration_us},
                {"label", s.label}};
      for (int size : {100, 50})
        if (size <= s.sensor_width && size <= s.sensor_height) {
          const AttentionWindow w = find_attention_window(s, size);
          j["window_" + std::to_string(size)] = {{"x0", w.x0}, {"y0", w.y0}};
        }
      out << j.dump(2) << "\n";
    } else if (train_cmd->parsed()) {
      const fs::path dir = make_out_dir(train_out);
      json run = {{"timesteps", train_timesteps}, {"window", train_window},   {"window_mode", train_mode},
                  {"out", train_out},             {"workers", workers},       {"checkpoint_every", checkpoint_every}};
      train_data.to(run);
      train_lif.to(run);
      train_opts.to(run);
      write_run_json(dir, "train", run);

      const TrainConfig config = train_opts.config(train_timesteps, train_window, workers);
      const NetworkSpec spec = build_network(train_window, false, train_lif.params());
      const WindowMode mode = kWindowModes.at(train_mode);
      const FrameSet train_set =
          prepare_frame_set(train_data.load("train", workers), train_window, train_timesteps, mode, workers);
      const FrameSet test_set =
          prepare_frame_set(train_data.load("test", workers), train_window, train_timesteps, mode, workers);
      if (train_set.empty()) throw Error(ErrorCode::EmptyDataset, "training split is empty");

      Checkpoint ckpt{spec, {}, "fp32", train_opts.seed, std::nullopt};
      const auto on_epoch = [&](const EpochLog& e, const WeightSet& w) {
        if (checkpoint_every > 0 && e.epoch % checkpoint_every == 0) {
          char name[40];
          std::snprintf(name, sizeof(name), "checkpoint_epoch_%03d.bin", e.epoch);
          save_checkpoint(dir / name, Checkpoint{spec, w, "fp32", train_opts.seed, std::nullopt});
        }
      };
      TrainResult result = train(spec, train_set, test_set, config, on_epoch);
      ckpt.weights = std::move(result.weights);
      save_checkpoint(dir / "checkpoint.bin", ckpt);
      write_text(dir / "train_log.csv", format_train_log(result.log));
      out << (result.log.empty() ? json::object() : summary_json(result.log.back())).dump() << "\n";
    } else if (quant_cmd->parsed()) {
      const fs::path dir = make_out_dir(quant_out);
      write_run_json(dir, "quantize",
                     {{"checkpoint", quant_ckpt},
                      {"bits", quant_bits},
                      {"rounding", quant_rounding},
                      {"seed", quant_seed},
                      {"no_bias", quant_no_bias},
                      {"out", quant_out},
                      {"workers", workers}});
      const Checkpoint source = load_checkpoint(quant_ckpt);
      QuantConfig q;
      q.bits = quant_bits;
      q.rounding = rounding_from_string(quant_rounding);
      q.seed = quant_seed;
      q.quantize_bias = !quant_no_bias;
      q.validate();
      const QuantizedWeights result = ptq(source.weights, q);
      const Checkpoint quantized = quantized_checkpoint(source, result, q);
      save_checkpoint(dir / "checkpoint.bin", quantized);
      const json summary = {{"bits", quant_bits},
                            {"rounding", quant_rounding},
                            {"frac_bits", quantized.quant->frac_bits},
                            {"saturated", result.stats.saturated},
                            {"memory_bits", memory_of(source.spec, quant_bits)}};
      write_text(dir / "quant.json", summary.dump(2) + "\n");
      out << summary.dump() << "\n";
    } else if (eval_cmd->parsed()) {
      json run = {{"checkpoint", eval_ckpt},
                  {"timesteps", eval_timesteps},
                  {"split", eval_split},
                  {"window_mode", eval_mode},
                  {"workers", workers}};
      eval_data.to(run);
      if (!eval_out.empty()) {
        run["out"] = eval_out;
        write_run_json(make_out_dir(eval_out), "eval", run);
      }
      const Checkpoint ckpt = load_checkpoint(eval_ckpt);
      const int window = ckpt.spec.input_window;
      const FrameSet data = prepare_frame_set(eval_data.load(eval_split, workers), window, eval_timesteps,
                                              kWindowModes.at(eval_mode), workers);
      if (data.empty()) throw Error(ErrorCode::EmptyDataset, "split '" + eval_split + "' is empty");
      const json metrics = {{"accuracy", evaluate(ckpt.spec, ckpt.weights, data, workers)},
                            {"samples", data.size()},
                            {"precision", ckpt.precision},
                            {"timesteps", eval_timesteps},
                            {"window", window}};
      if (!eval_out.empty()) write_text(fs::path(eval_out) / "metrics.json", metrics.dump(2) + "\n");
      out << metrics.dump() << "\n";
    } else if (dse_cmd->parsed()) {
      const fs::path dir = make_out_dir(dse_out);
      const GridConfig grid = dse_grid.empty() ? GridConfig{} : inline_or_file(dse_grid).get<GridConfig>();
      const Constraints constraints = dse_constraints.empty() ? Constraints{} : parse_constraints(inline_or_file(dse_constraints));
      const CostConstants constants = constants_from(dse_constants);

      json run = {{"grid", grid},
                  {"constraints", constraints},
                  {"policy", dse_policy},
                  {"tolerance", dse_tolerance},
                  {"out", dse_out},
                  {"workers", workers}};
      if (!dse_constants.empty()) run["constants"] = dse_constants;
      if (!dse_table.empty()) {
        run["accuracy_table"] = dse_table;
      } else {
        run["rounding"] = dse_rounding;
        run["quant_seed"] = dse_quant_seed;
        run["no_bias"] = dse_no_bias;
        run["window_mode"] = dse_mode;
        dse_data.to(run);
        dse_lif.to(run);
        dse_train.to(run);
      }
      write_run_json(dir, "dse", run);

      std::vector<DsePoint> points;
      if (!dse_table.empty()) {
        const AccuracyTable table = dse_table == "shipped" ? shipped_accuracy_table() : load_accuracy_table(dse_table);
        points = points_from_table(table, grid, constants);
      } else {
        const LifParams lif = dse_lif.params();
        const WindowMode mode = kWindowModes.at(dse_mode);
        const auto train_samples = dse_data.load("train", workers);
        const auto test_samples = dse_data.load("test", workers);
        std::map<int, std::vector<EventSample>> train_map, test_map;
        for (int w : grid.windows) {
          train_map[w] = train_samples;
          test_map[w] = test_samples;
        }
        const BaselineMap baselines = train_baselines(train_map, grid, dse_train.config(20, 100, workers), lif, mode);
        DseOptions options;
        options.constants = constants;
        options.lif = lif;
        options.rounding = rounding_from_string(dse_rounding);
        options.quant_seed = dse_quant_seed;
        options.quantize_bias = !dse_no_bias;
        options.window_mode = mode;
        options.workers = workers;
        points = run_dse(test_map, baselines, grid, options);
      }
      emit_report(points, dir, constants);

      SelectionPolicy policy;
      policy.kind = dse_policy == "max_accuracy" ? SelectionPolicy::Kind::MaxAccuracy
                                                 : SelectionPolicy::Kind::WithinTolerance;
      policy.tolerance = dse_tolerance;
      const DsePoint chosen = select(points, constraints, policy, constants);
      const json selection = {{"tag", chosen.setting.tag()},
                              {"accuracy", chosen.accuracy},
                              {"accuracy_source", chosen.accuracy_source},
                              {"memory_bits", chosen.cost.memory_bits},
                              {"latency_ratio", latency_ratio(chosen, constraints, constants)},
                              {"energy_units", chosen.cost.energy_units},
                              {"constraints", constraints},
                              {"policy", dse_policy}};
      write_text(dir / "selection.json", selection.dump(2) + "\n");
      out << selection.dump() << "\n";
    } else if (cx_cmd->parsed()) {
      const CostConstants constants = constants_from(cx_constants);
      if (!cx_out.empty()) {
        json run = {{"window", cx_window}, {"timestep", cx_timesteps}, {"bits", cx_bits}, {"out", cx_out}};
        if (!cx_constants.empty()) run["constants"] = cx_constants;
        write_run_json(make_out_dir(cx_out), "complexity", run);
      }
      const CostReport report = full_report(cx_bits, cx_timesteps, cx_window, constants);
      const std::string text = json(report).dump(2) + "\n";
      if (!cx_out.empty()) write_text(fs::path(cx_out) / "cost_report.json", text);
      out << text;
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "InvalidArgument: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace snnopt
