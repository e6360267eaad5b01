#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "snnopt/network.hpp"

namespace snnopt {

struct LayerOps {
  LayerKind kind = LayerKind::Conv;
  std::uint64_t synaptic_ops = 0;
  std::uint64_t neuron_ops = 0;
};

struct OpCount {
  std::uint64_t synaptic_ops = 0;
  std::uint64_t neuron_ops = 0;
  std::vector<LayerOps> per_layer;

  std::uint64_t total() const { return synaptic_ops + neuron_ops; }
};

/// Analytic model constants. Latency and energy are in model units, not
/// wall-clock time or joules.
struct CostConstants {
  double latency_fixed = 0.0;               // per-sample overhead
  double latency_per_op = 1e-6;             // per synaptic op
  double energy_per_synop_32b = 1e-6;
  double alpha = 0.989;                     // bit-independent share of a synaptic op's energy
  double energy_per_neuron_update = 1e-6;

  void validate() const;
  friend bool operator==(const CostConstants&, const CostConstants&) = default;
};

void to_json(nlohmann::json& j, const CostConstants& c);
void from_json(const nlohmann::json& j, CostConstants& c);

CostConstants load_constants(const std::filesystem::path& path);
/// The calibrated constants shipped in data/cost_constants.json.
CostConstants shipped_constants();

/// Per timestep: conv = out_ch * H_out * W_out * in_ch * k^2, FC = in * out,
/// avg_pool = out_elements * k^2 synaptic ops; one neuron op per LIF output
/// element. Everything scales by T.
OpCount count_ops(const NetworkSpec& spec, int timesteps);

/// (W0 / W1)^2 * (T0 / T1).
double reduction_factor(double w0, double w1, double t0, double t1);

/// latency_fixed + latency_per_op * synaptic_ops.
double latency_estimate(const OpCount& ops, const CostConstants& c);

/// syn * e32 * (alpha + (1 - alpha) * B / 32) + neuron * e_neuron.
double energy_estimate(const OpCount& ops, int bits, const CostConstants& c);

/// "<B>b_<T>t_<W>w".
std::string setting_tag(int bits, int timesteps, int window);

struct CostReport {
  std::string tag;
  int bits = 0;
  int timesteps = 0;
  int window = 0;
  std::uint64_t memory_bits = 0;
  double latency_units = 0.0;
  double energy_units = 0.0;
  OpCount ops;
};

void to_json(nlohmann::json& j, const CostReport& r);

/// spec.input_window must equal `window`.
CostReport full_report(const NetworkSpec& spec, int bits, int timesteps, int window, const CostConstants& c);
/// Uses the reference architecture for `window` (extended mode for other sizes).
CostReport full_report(int bits, int timesteps, int window, const CostConstants& c);

struct CalibrationTargets {
  int window = 100;
  int baseline_timesteps = 20;
  int baseline_bits = 32;
  int reduced_timesteps = 5;
  int reduced_bits = 10;
  /// Latency speed-up baseline -> reduced timesteps. Values above T0/T1 are
  /// unreachable and clamp to a zero fixed overhead.
  double speedup = 4.0;
  /// Energy improvement baseline -> (reduced_bits, reduced_timesteps).
  double energy_improvement = 4.03;
};

/// Solves latency_fixed and alpha in closed form, keeping the unit constants
/// of `base`.
CostConstants calibrate(const CalibrationTargets& targets, const CostConstants& base = {});

}  // namespace snnopt
