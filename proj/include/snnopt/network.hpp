#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace snnopt {

enum class ResetMode { Zero, Subtract };

struct LifParams {
  double v_threshold = 0.4;
  double leak = 0.25;  // multiplicative decay per timestep, in [0, 1)
  ResetMode reset_mode = ResetMode::Zero;

  void validate() const;
  friend bool operator==(const LifParams&, const LifParams&) = default;
};

enum class LayerKind { AvgPool, Conv, FullyConnected };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::Conv;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;   // conv and pool; pool stride equals kernel
  int padding = 0;  // conv only
  int stride = 1;   // conv only

  bool has_weights() const { return kind != LayerKind::AvgPool; }
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Shape {
  int channels = 0;
  int height = 1;
  int width = 1;

  std::size_t size() const { return static_cast<std::size_t>(channels) * height * width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  int input_window = 0;
  int input_channels = 2;  // one per polarity
  LifParams lif{};

  Shape input_shape() const { return {input_channels, input_window, input_window}; }
  /// Output shape of every layer; throws ShapeMismatch on an inconsistent graph.
  std::vector<Shape> output_shapes() const;
  /// Classes = outputs of the last layer.
  int num_classes() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// The two reference architectures (window 100 or 50). With strict = false
/// any window giving a non-empty feature map is accepted and the FC sizes
/// are recomputed (hidden width = flatten / 2).
NetworkSpec build_network(int window, bool strict = true, const LifParams& lif = {});

/// Parameters of one layer. Conv weights are [out][in][k][k], FC weights
/// [out][in]. Pooling layers hold empty vectors.
struct LayerParams {
  std::vector<double> weight;
  std::vector<double> bias;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct WeightSet {
  std::vector<LayerParams> layers;

  friend bool operator==(const WeightSet&, const WeightSet&) = default;
};

std::size_t weight_count(const LayerSpec& layer);
/// Total synaptic weights; biases only when include_bias is set.
std::size_t weight_count(const NetworkSpec& spec, bool include_bias = false);

WeightSet zero_weights(const NetworkSpec& spec);
/// Per-layer uniform in +-sqrt(1 / fan_in), biases likewise.
WeightSet init_weights(const NetworkSpec& spec, std::uint64_t seed);
/// Throws ShapeMismatch unless every tensor matches the spec and is finite.
void validate_weights(const NetworkSpec& spec, const WeightSet& weights);

}  // namespace snnopt
