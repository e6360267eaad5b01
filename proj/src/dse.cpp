#include "snnopt/dse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "snnopt/error.hpp"
#include "snnopt/parallel.hpp"

namespace snnopt {
namespace {

std::vector<int> sorted_axis(std::vector<int> axis, const char* name) {
  if (axis.empty()) throw Error(ErrorCode::EmptyAxis, std::string(name) + " axis is empty");
  for (int v : axis)
    if (v <= 0) throw Error(ErrorCode::InvalidArgument, std::string(name) + " values must be positive");
  std::sort(axis.begin(), axis.end(), std::greater<>());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  return axis;
}

std::vector<std::pair<int, int>> timestep_window_pairs(const GridConfig& grid) {
  std::vector<std::pair<int, int>> pairs;
  for (int t : sorted_axis(grid.timesteps, "timesteps"))
    for (int w : sorted_axis(grid.windows, "windows")) pairs.emplace_back(t, w);
  return pairs;
}

double reference_latency(int window, const Constraints& c, const CostConstants& constants) {
  const int w = c.latency_baseline == LatencyBaseline::PerWindow ? window : c.baseline_window;
  return full_report(c.baseline_bits, c.baseline_timesteps, w, constants).latency_units;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

constexpr const char* kCsvHeader =
    "tag,bits,timesteps,window,accuracy,accuracy_source,memory_bits,latency_units,energy_units,syn_ops,neuron_ops,"
    "memory_ratio,latency_ratio,energy_ratio,ops_ratio";

}  // namespace

void to_json(nlohmann::json& j, const GridConfig& g) {
  j = {{"bits", g.bits}, {"timesteps", g.timesteps}, {"windows", g.windows}};
}

void from_json(const nlohmann::json& j, GridConfig& g) {
  j.at("bits").get_to(g.bits);
  j.at("timesteps").get_to(g.timesteps);
  j.at("windows").get_to(g.windows);
}

std::vector<Setting> enumerate_grid(const GridConfig& grid) {
  const auto bits = sorted_axis(grid.bits, "bits");
  const auto steps = sorted_axis(grid.timesteps, "timesteps");
  const auto windows = sorted_axis(grid.windows, "windows");
  std::vector<Setting> out;
  out.reserve(bits.size() * steps.size() * windows.size());
  for (int b : bits)
    for (int t : steps)
      for (int w : windows) out.push_back({b, t, w});
  return out;
}

BaselineMap train_baselines(const std::map<int, std::vector<EventSample>>& train_samples, const GridConfig& grid,
                            const TrainConfig& base_config, const LifParams& lif, WindowMode mode) {
  BaselineMap baselines;
  for (const auto& [t, w] : timestep_window_pairs(grid)) {
    const auto it = train_samples.find(w);
    if (it == train_samples.end() || it->second.empty())
      throw Error(ErrorCode::EmptyDataset, "no training samples for window " + std::to_string(w));
    TrainConfig config = base_config;
    config.timesteps = t;
    config.window = w;
    const NetworkSpec spec = build_network(w, false, lif);
    const FrameSet frames = prepare_frame_set(it->second, w, t, mode, config.workers);
    baselines.emplace(std::make_pair(t, w), train(spec, frames, FrameSet{}, config).weights);
  }
  return baselines;
}

std::vector<DsePoint> run_dse(const std::map<int, std::vector<EventSample>>& test_samples,
                              const BaselineMap& baselines, const GridConfig& grid, const DseOptions& options) {
  const auto settings = enumerate_grid(grid);
  std::map<std::pair<int, int>, FrameSet> frames;
  for (const auto& key : timestep_window_pairs(grid)) {
    if (!baselines.contains(key))
      throw Error(ErrorCode::MissingBaseline, "no trained weights for " + std::to_string(key.first) + "t_" +
                                                  std::to_string(key.second) + "w");
    const auto it = test_samples.find(key.second);
    if (it == test_samples.end() || it->second.empty())
      throw Error(ErrorCode::EmptyDataset, "no test samples for window " + std::to_string(key.second));
    frames.emplace(key, prepare_frame_set(it->second, key.second, key.first, options.window_mode, options.workers));
  }

  std::vector<DsePoint> points(settings.size());
  parallel_for(settings.size(), options.workers, [&](std::size_t i) {
    const Setting& s = settings[i];
    const NetworkSpec spec = build_network(s.window, false, options.lif);
    QuantConfig q;
    q.bits = s.bits;
    q.rounding = options.rounding;
    q.seed = options.quant_seed;
    q.quantize_bias = options.quantize_bias;
    const WeightSet quantized = ptq(baselines.at({s.timesteps, s.window}), q).weights;
    points[i].setting = s;
    points[i].accuracy = evaluate(spec, quantized, frames.at({s.timesteps, s.window}));
    points[i].accuracy_source = "live";
    points[i].cost = full_report(spec, s.bits, s.timesteps, s.window, options.constants);
  });
  return points;
}

AccuracyTable parse_accuracy_table(const nlohmann::json& doc) {
  AccuracyTable table;
  try {
    for (const auto& item : doc.at("points")) {
      const std::string tag =
          setting_tag(item.at("bits").get<int>(), item.at("timesteps").get<int>(), item.at("window").get<int>());
      const double acc = item.at("accuracy").get<double>();
      if (!(acc >= 0.0 && acc <= 1.0)) throw Error(ErrorCode::InvalidArgument, tag + ": accuracy outside [0, 1]");
      table[tag] = AccuracyEntry{acc, item.value("source", std::string("table"))};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("accuracy table: ") + e.what());
  }
  return table;
}

AccuracyTable load_accuracy_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  try {
    return parse_accuracy_table(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
}

AccuracyTable shipped_accuracy_table() {
  return load_accuracy_table(std::filesystem::path(SNNOPT_DATA_DIR) / "ncars_accuracy.json");
}

std::vector<DsePoint> points_from_table(const AccuracyTable& table, const GridConfig& grid,
                                        const CostConstants& constants) {
  std::vector<DsePoint> points;
  for (const Setting& s : enumerate_grid(grid)) {
    const auto it = table.find(s.tag());
    if (it == table.end()) throw Error(ErrorCode::MissingBaseline, "no accuracy for " + s.tag());
    points.push_back(DsePoint{s, it->second.accuracy, it->second.source,
                              full_report(s.bits, s.timesteps, s.window, constants)});
  }
  return points;
}

Constraints parse_constraints(const nlohmann::json& doc) {
  Constraints c;
  try {
    if (doc.contains("max_memory_bits")) c.max_memory_bits = doc.at("max_memory_bits").get<std::uint64_t>();
    if (doc.contains("max_memory_mb"))
      c.max_memory_bits = static_cast<std::uint64_t>(std::llround(doc.at("max_memory_mb").get<double>() * 1e6));
    if (doc.contains("max_latency_ratio")) c.max_latency_ratio = doc.at("max_latency_ratio").get<double>();
    if (doc.contains("min_accuracy")) c.min_accuracy = doc.at("min_accuracy").get<double>();
    if (doc.contains("latency_baseline")) {
      const auto mode = doc.at("latency_baseline").get<std::string>();
      if (mode == "per_window") c.latency_baseline = LatencyBaseline::PerWindow;
      else if (mode == "global") c.latency_baseline = LatencyBaseline::Global;
      else throw Error(ErrorCode::InvalidArgument, "latency_baseline must be per_window or global");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("constraints: ") + e.what());
  }
  if ((c.max_memory_bits && *c.max_memory_bits == 0) || (c.max_latency_ratio && !(*c.max_latency_ratio > 0)) ||
      (c.min_accuracy && !(*c.min_accuracy > 0)))
    throw Error(ErrorCode::InvalidArgument, "constraints must be positive");
  return c;
}

void to_json(nlohmann::json& j, const Constraints& c) {
  j = nlohmann::json::object();
  if (c.max_memory_bits) j["max_memory_bits"] = *c.max_memory_bits;
  if (c.max_latency_ratio) j["max_latency_ratio"] = *c.max_latency_ratio;
  if (c.min_accuracy) j["min_accuracy"] = *c.min_accuracy;
  j["latency_baseline"] = c.latency_baseline == LatencyBaseline::PerWindow ? "per_window" : "global";
}

double latency_ratio(const DsePoint& point, const Constraints& constraints, const CostConstants& constants) {
  return point.cost.latency_units / reference_latency(point.setting.window, constraints, constants);
}

std::vector<DsePoint> filter_constraints(const std::vector<DsePoint>& points, const Constraints& constraints,
                                         const CostConstants& constants) {
  std::vector<DsePoint> kept;
  for (const auto& p : points) {
    if (constraints.max_memory_bits && p.cost.memory_bits > *constraints.max_memory_bits) continue;
    if (constraints.min_accuracy && p.accuracy < *constraints.min_accuracy) continue;
    if (constraints.max_latency_ratio && latency_ratio(p, constraints, constants) > *constraints.max_latency_ratio)
      continue;
    kept.push_back(p);
  }
  return kept;
}

bool dominates(const DsePoint& a, const DsePoint& b) {
  const bool no_worse = a.accuracy >= b.accuracy && a.cost.memory_bits <= b.cost.memory_bits &&
                        a.cost.latency_units <= b.cost.latency_units && a.cost.energy_units <= b.cost.energy_units;
  const bool better = a.accuracy > b.accuracy || a.cost.memory_bits < b.cost.memory_bits ||
                      a.cost.latency_units < b.cost.latency_units || a.cost.energy_units < b.cost.energy_units;
  return no_worse && better;
}

std::vector<DsePoint> pareto_front(const std::vector<DsePoint>& points) {
  // Sorting by accuracy first means a dominator of p always precedes p or
  // ties it on accuracy, so one pass over the sorted order suffices for
  // pruning against the current front; ties are checked both ways.
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].accuracy > points[b].accuracy; });
  std::vector<std::size_t> front;
  for (std::size_t idx : order) {
    const DsePoint& p = points[idx];
    bool dominated = false;
    for (std::size_t f : front)
      if (dominates(points[f], p)) {
        dominated = true;
        break;
      }
    if (dominated) continue;
    std::erase_if(front, [&](std::size_t f) { return dominates(p, points[f]); });
    front.push_back(idx);
  }
  std::stable_sort(front.begin(), front.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].accuracy != points[b].accuracy) return points[a].accuracy > points[b].accuracy;
    return a < b;
  });
  std::vector<DsePoint> out;
  out.reserve(front.size());
  for (std::size_t f : front) out.push_back(points[f]);
  return out;
}

DsePoint select(const std::vector<DsePoint>& points, const Constraints& constraints, const SelectionPolicy& policy,
                const CostConstants& constants) {
  const auto feasible = filter_constraints(points, constraints, constants);
  if (feasible.empty()) throw Error(ErrorCode::NoFeasiblePoint, "no grid point satisfies the constraints");

  if (policy.kind == SelectionPolicy::Kind::MaxAccuracy) {
    return *std::min_element(feasible.begin(), feasible.end(), [](const DsePoint& a, const DsePoint& b) {
      if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
      if (a.cost.memory_bits != b.cost.memory_bits) return a.cost.memory_bits < b.cost.memory_bits;
      if (a.cost.latency_units != b.cost.latency_units) return a.cost.latency_units < b.cost.latency_units;
      return a.setting.bits < b.setting.bits;
    });
  }

  double best = 0.0;
  for (const auto& p : feasible) best = std::max(best, p.accuracy);
  // Accuracies are fractions; 1e-12 absorbs decimal round-off in the table.
  const double floor = best - policy.tolerance - 1e-12;
  std::vector<DsePoint> near;
  for (const auto& p : feasible)
    if (p.accuracy >= floor) near.push_back(p);
  return *std::min_element(near.begin(), near.end(), [](const DsePoint& a, const DsePoint& b) {
    if (a.cost.memory_bits != b.cost.memory_bits) return a.cost.memory_bits < b.cost.memory_bits;
    if (a.cost.energy_units != b.cost.energy_units) return a.cost.energy_units < b.cost.energy_units;
    if (a.cost.latency_units != b.cost.latency_units) return a.cost.latency_units < b.cost.latency_units;
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.setting.bits < b.setting.bits;
  });
}

std::string format_results_csv(const std::vector<DsePoint>& points, const CostConstants& constants) {
  const CostReport base = full_report(32, 20, 100, constants);
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& p : points) {
    const auto& c = p.cost;
    out += p.setting.tag() + "," + std::to_string(p.setting.bits) + "," + std::to_string(p.setting.timesteps) + "," +
           std::to_string(p.setting.window) + "," + fmt(p.accuracy) + "," + p.accuracy_source + "," +
           std::to_string(c.memory_bits) + "," + fmt(c.latency_units) + "," + fmt(c.energy_units) + "," +
           std::to_string(c.ops.synaptic_ops) + "," + std::to_string(c.ops.neuron_ops) + "," +
           fmt(static_cast<double>(c.memory_bits) / static_cast<double>(base.memory_bits)) + "," +
           fmt(c.latency_units / base.latency_units) + "," + fmt(c.energy_units / base.energy_units) + "," +
           fmt(static_cast<double>(c.ops.total()) / static_cast<double>(base.ops.total())) + "\n";
  }
  return out;
}

std::vector<DsePoint> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error(ErrorCode::InvalidArgument, "unexpected CSV header");
  std::vector<DsePoint> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 15) throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no), line_no);
    try {
      DsePoint p;
      p.setting = {std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3])};
      p.accuracy = std::stod(f[4]);
      p.accuracy_source = f[5];
      p.cost.tag = f[0];
      p.cost.bits = p.setting.bits;
      p.cost.timesteps = p.setting.timesteps;
      p.cost.window = p.setting.window;
      p.cost.memory_bits = std::stoull(f[6]);
      p.cost.latency_units = std::stod(f[7]);
      p.cost.energy_units = std::stod(f[8]);
      p.cost.ops.synaptic_ops = std::stoull(f[9]);
      p.cost.ops.neuron_ops = std::stoull(f[10]);
      points.push_back(std::move(p));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no), line_no);
    }
  }
  return points;
}

void emit_report(const std::vector<DsePoint>& points, const std::filesystem::path& dir,
                 const CostConstants& constants) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
  auto write = [&](const char* name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    out << body;
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / name).string());
  };
  write("dse_results.csv", format_results_csv(points, constants));
  write("pareto.csv", format_results_csv(pareto_front(points), constants));
}

}  // namespace snnopt
