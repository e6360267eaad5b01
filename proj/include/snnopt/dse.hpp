#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "snnopt/cost_models.hpp"
#include "snnopt/event_io.hpp"
#include "snnopt/network.hpp"
#include "snnopt/quantizer.hpp"
#include "snnopt/stbp.hpp"

namespace snnopt {

struct GridConfig {
  std::vector<int> bits{32, 16, 12, 10};
  std::vector<int> timesteps{20, 15, 10, 5};
  std::vector<int> windows{100, 50};
};

void to_json(nlohmann::json& j, const GridConfig& g);
void from_json(const nlohmann::json& j, GridConfig& g);

struct Setting {
  int bits = 32;
  int timesteps = 20;
  int window = 100;

  std::string tag() const { return setting_tag(bits, timesteps, window); }
  friend auto operator<=>(const Setting&, const Setting&) = default;
};

/// Cartesian product, B outermost; each axis deduplicated and descending.
std::vector<Setting> enumerate_grid(const GridConfig& grid);

struct DsePoint {
  Setting setting;
  double accuracy = 0.0;        // [0, 1]
  std::string accuracy_source;  // "live", "reported", "range_midpoint", ...
  CostReport cost;
};

/// (timesteps, window) -> trained full-precision weights.
using BaselineMap = std::map<std::pair<int, int>, WeightSet>;

struct DseOptions {
  CostConstants constants{};
  LifParams lif{};
  Rounding rounding = Rounding::TR;
  std::uint64_t quant_seed = 0;
  bool quantize_bias = true;
  WindowMode window_mode = WindowMode::PerSample;
  std::size_t workers = 1;
};

/// Trains one full-precision baseline per (T, W) of the grid.
BaselineMap train_baselines(const std::map<int, std::vector<EventSample>>& train_samples, const GridConfig& grid,
                            const TrainConfig& base_config, const LifParams& lif = {},
                            WindowMode mode = WindowMode::PerSample);

/// PTQ + evaluation of every grid point on the test samples of its window.
/// Frames are binned once per (T, W); every (T, W, B) is evaluated once.
std::vector<DsePoint> run_dse(const std::map<int, std::vector<EventSample>>& test_samples,
                              const BaselineMap& baselines, const GridConfig& grid, const DseOptions& options);

struct AccuracyEntry {
  double accuracy = 0.0;
  std::string source;
};

/// tag -> accuracy.
using AccuracyTable = std::map<std::string, AccuracyEntry>;

AccuracyTable load_accuracy_table(const std::filesystem::path& path);
AccuracyTable parse_accuracy_table(const nlohmann::json& doc);
/// Imported NCARS accuracies shipped in data/ncars_accuracy.json.
AccuracyTable shipped_accuracy_table();

/// Cost reports for the grid with accuracies taken from a table.
std::vector<DsePoint> points_from_table(const AccuracyTable& table, const GridConfig& grid,
                                        const CostConstants& constants);

enum class LatencyBaseline { PerWindow, Global };

struct Constraints {
  std::optional<std::uint64_t> max_memory_bits;
  std::optional<double> max_latency_ratio;
  std::optional<double> min_accuracy;
  LatencyBaseline latency_baseline = LatencyBaseline::PerWindow;
  int baseline_bits = 32;
  int baseline_timesteps = 20;
  int baseline_window = 100;
};

/// Accepts max_memory_bits or max_memory_mb (10^6 bits), max_latency_ratio,
/// min_accuracy and latency_baseline ("per_window" | "global").
Constraints parse_constraints(const nlohmann::json& doc);
void to_json(nlohmann::json& j, const Constraints& c);

/// Latency of `point` relative to the baseline setting's modelled latency.
double latency_ratio(const DsePoint& point, const Constraints& constraints, const CostConstants& constants);

std::vector<DsePoint> filter_constraints(const std::vector<DsePoint>& points, const Constraints& constraints,
                                         const CostConstants& constants);

/// True when a is no worse than b in accuracy, memory, latency and energy
/// and strictly better in at least one.
bool dominates(const DsePoint& a, const DsePoint& b);

/// Non-dominated points, by accuracy descending (input order on ties).
std::vector<DsePoint> pareto_front(const std::vector<DsePoint>& points);

struct SelectionPolicy {
  enum class Kind { MaxAccuracy, WithinTolerance };
  Kind kind = Kind::MaxAccuracy;
  double tolerance = 0.02;  // WithinTolerance: accuracy slack below the best feasible point
};

/// MaxAccuracy: highest accuracy, ties to lower memory, latency, bits.
/// WithinTolerance: among feasible points within `tolerance` of the best
/// feasible accuracy, the lowest memory, then energy, latency, bits.
DsePoint select(const std::vector<DsePoint>& points, const Constraints& constraints, const SelectionPolicy& policy,
                const CostConstants& constants);

/// Writes dse_results.csv and pareto.csv. Ratio columns are relative to the
/// modelled 32b_20t_100w baseline.
void emit_report(const std::vector<DsePoint>& points, const std::filesystem::path& dir,
                 const CostConstants& constants);
std::string format_results_csv(const std::vector<DsePoint>& points, const CostConstants& constants);
/// Inverse of format_results_csv (per-layer op breakdown is not stored).
std::vector<DsePoint> parse_results_csv(const std::string& text);

}  // namespace snnopt
