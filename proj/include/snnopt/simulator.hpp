#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "snnopt/event_io.hpp"
#include "snnopt/network.hpp"

namespace snnopt {

/// Hard: Heaviside at V >= V_th. Relaxed: the clipped-linear ramp of slope
/// 1/(2a) over [V_th - a, V_th + a], used to check gradients.
enum class SpikeMode { Hard, Relaxed };

struct SpikeFunction {
  SpikeMode mode = SpikeMode::Hard;
  double half_width = 0.5;  // a, relaxed mode only

  double operator()(double v, double v_threshold) const {
    if (mode == SpikeMode::Hard) return v >= v_threshold ? 1.0 : 0.0;
    const double s = (v - v_threshold + half_width) / (2.0 * half_width);
    return s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
  }
};

/// Membrane potential and last emitted spikes of one LIF layer.
struct LifState {
  std::vector<double> potential;
  std::vector<double> spikes;

  explicit LifState(std::size_t n = 0) : potential(n, 0.0), spikes(n, 0.0) {}
};

/// Per weighted layer; pooling layers keep an empty state.
struct MembraneState {
  std::vector<LifState> layers;

  static MembraneState reset(const NetworkSpec& spec);
};

/// V <- leak * V * (1 - s_prev) + I (zero reset) or
/// V <- leak * (V - V_th * s_prev) + I (subtract reset); then s = f(V).
/// Returns the new spikes, also stored in the state.
std::span<const double> lif_step(LifState& state, std::span<const double> input_current, const LifParams& params,
                                 const SpikeFunction& spike = {});

/// Synaptic map of one layer (no LIF). `out` is resized to the output shape.
void layer_forward(const LayerSpec& layer, const Shape& in_shape, const LayerParams& params,
                   std::span<const double> input, std::vector<double>& out);
std::vector<double> layer_forward(const LayerSpec& layer, const Shape& in_shape, const LayerParams& params,
                                  std::span<const double> input);

/// Everything backward() needs, indexed [timestep][layer].
struct ForwardTrace {
  std::vector<std::vector<std::vector<double>>> inputs;      // layer input
  std::vector<std::vector<std::vector<double>>> potentials;  // LIF layers only
  std::vector<std::vector<std::vector<double>>> spikes;      // LIF layers only

  bool empty() const { return inputs.empty(); }
};

struct ForwardResult {
  std::vector<double> counts;  // output spikes summed over T
  int timesteps = 0;
  ForwardTrace trace;          // filled when requested
};

struct ForwardOptions {
  SpikeFunction spike{};
  bool record = false;
};

/// Runs T timesteps from a freshly reset state. Single-threaded.
ForwardResult forward(const NetworkSpec& spec, const WeightSet& weights, const SpikeFrames& frames,
                      const ForwardOptions& options = {});

/// Same as above over arbitrary real-valued input frames, shaped
/// T x input_shape() and flattened. Used by gradient checks.
ForwardResult forward(const NetworkSpec& spec, const WeightSet& weights, std::span<const double> inputs, int timesteps,
                      const ForwardOptions& options = {});

struct Decoded {
  int predicted = 0;
  std::vector<double> rates;
};

/// rate = count / T; argmax with ties to the lowest class.
Decoded decode(std::span<const double> counts, int timesteps);

}  // namespace snnopt
