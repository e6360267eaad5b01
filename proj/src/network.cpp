#include "snnopt/network.hpp"

#include <cmath>

#include "snnopt/error.hpp"
#include "snnopt/rng.hpp"

namespace snnopt {

void LifParams::validate() const {
  if (!(v_threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "v_threshold must be > 0");
  if (!(leak >= 0.0 && leak < 1.0)) throw Error(ErrorCode::InvalidArgument, "leak must be in [0, 1)");
}

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::AvgPool: return "avg_pool";
    case LayerKind::Conv: return "conv";
    case LayerKind::FullyConnected: return "fully_connected";
  }
  return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
  if (name == "avg_pool") return LayerKind::AvgPool;
  if (name == "conv") return LayerKind::Conv;
  if (name == "fully_connected") return LayerKind::FullyConnected;
  throw Error(ErrorCode::InvalidArgument, "unknown layer kind '" + name + "'");
}

std::vector<Shape> NetworkSpec::output_shapes() const {
  std::vector<Shape> shapes;
  shapes.reserve(layers.size());
  Shape cur = input_shape();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" + to_string(l.kind) + ")";
    switch (l.kind) {
      case LayerKind::AvgPool:
        if (l.kernel < 1 || l.in_channels != cur.channels || l.out_channels != cur.channels)
          throw Error(ErrorCode::ShapeMismatch, where + ": channel/kernel mismatch");
        cur = {cur.channels, cur.height / l.kernel, cur.width / l.kernel};
        break;
      case LayerKind::Conv:
        if (l.kernel < 1 || l.stride < 1 || l.padding < 0 || l.in_channels != cur.channels || l.out_channels < 1)
          throw Error(ErrorCode::ShapeMismatch, where + ": channel/kernel mismatch");
        cur = {l.out_channels, (cur.height + 2 * l.padding - l.kernel) / l.stride + 1,
               (cur.width + 2 * l.padding - l.kernel) / l.stride + 1};
        break;
      case LayerKind::FullyConnected:
        if (static_cast<std::size_t>(l.in_channels) != cur.size() || l.out_channels < 1)
          throw Error(ErrorCode::ShapeMismatch, where + ": expects " + std::to_string(l.in_channels) +
                                                    " inputs, got " + std::to_string(cur.size()));
        cur = {l.out_channels, 1, 1};
        break;
    }
    if (cur.height < 1 || cur.width < 1) throw Error(ErrorCode::ShapeMismatch, where + ": empty feature map");
    shapes.push_back(cur);
  }
  return shapes;
}

int NetworkSpec::num_classes() const {
  if (layers.empty()) throw Error(ErrorCode::ShapeMismatch, "empty network");
  return static_cast<int>(output_shapes().back().size());
}

NetworkSpec build_network(int window, bool strict, const LifParams& lif) {
  lif.validate();
  if (strict && window != 100 && window != 50)
    throw Error(ErrorCode::UnsupportedWindow, "window " + std::to_string(window) + " (expected 100 or 50)");
  NetworkSpec spec;
  spec.input_window = window;
  spec.lif = lif;
  spec.layers = {
      {LayerKind::AvgPool, 2, 2, 4, 0, 4},
      {LayerKind::Conv, 2, 32, 3, 1, 1},
      {LayerKind::AvgPool, 32, 32, 2, 0, 2},
      {LayerKind::Conv, 32, 32, 3, 1, 1},
      {LayerKind::AvgPool, 32, 32, 2, 0, 2},
  };
  // Flatten size of the convolutional trunk.
  NetworkSpec trunk = spec;
  const auto shapes = trunk.output_shapes();
  const int flatten = static_cast<int>(shapes.back().size());
  int hidden = flatten / 2;
  if (window == 100) hidden = 512;
  if (window == 50) hidden = 144;
  spec.layers.push_back({LayerKind::FullyConnected, flatten, hidden, 0, 0, 1});
  spec.layers.push_back({LayerKind::FullyConnected, hidden, 2, 0, 0, 1});
  return spec;
}

std::size_t weight_count(const LayerSpec& layer) {
  switch (layer.kind) {
    case LayerKind::AvgPool: return 0;
    case LayerKind::Conv:
      return static_cast<std::size_t>(layer.out_channels) * layer.in_channels * layer.kernel * layer.kernel;
    case LayerKind::FullyConnected: return static_cast<std::size_t>(layer.out_channels) * layer.in_channels;
  }
  return 0;
}

std::size_t weight_count(const NetworkSpec& spec, bool include_bias) {
  std::size_t total = 0;
  for (const auto& l : spec.layers) {
    total += weight_count(l);
    if (include_bias && l.has_weights()) total += static_cast<std::size_t>(l.out_channels);
  }
  return total;
}

WeightSet zero_weights(const NetworkSpec& spec) {
  WeightSet w;
  w.layers.resize(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (!spec.layers[i].has_weights()) continue;
    w.layers[i].weight.assign(weight_count(spec.layers[i]), 0.0);
    w.layers[i].bias.assign(static_cast<std::size_t>(spec.layers[i].out_channels), 0.0);
  }
  return w;
}

WeightSet init_weights(const NetworkSpec& spec, std::uint64_t seed) {
  spec.output_shapes();
  WeightSet w = zero_weights(spec);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    if (!l.has_weights()) continue;
    const double fan_in = l.kind == LayerKind::Conv ? static_cast<double>(l.in_channels) * l.kernel * l.kernel
                                                    : static_cast<double>(l.in_channels);
    const double bound = std::sqrt(1.0 / fan_in);
    Rng rng(derive_seed(seed, {i}));
    for (double& v : w.layers[i].weight) v = rng.uniform(-bound, bound);
    for (double& v : w.layers[i].bias) v = rng.uniform(-bound, bound);
  }
  return w;
}

void validate_weights(const NetworkSpec& spec, const WeightSet& weights) {
  if (weights.layers.size() != spec.layers.size())
    throw Error(ErrorCode::ShapeMismatch, "weight set has " + std::to_string(weights.layers.size()) +
                                              " layers, network has " + std::to_string(spec.layers.size()));
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    const LayerParams& p = weights.layers[i];
    const std::size_t bias = l.has_weights() ? static_cast<std::size_t>(l.out_channels) : 0;
    if (p.weight.size() != weight_count(l) || p.bias.size() != bias)
      throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(i) + " parameter shape");
    for (double v : p.weight)
      if (!std::isfinite(v)) throw Error(ErrorCode::ShapeMismatch, "non-finite weight in layer " + std::to_string(i));
    for (double v : p.bias)
      if (!std::isfinite(v)) throw Error(ErrorCode::ShapeMismatch, "non-finite bias in layer " + std::to_string(i));
  }
}

}  // namespace snnopt
