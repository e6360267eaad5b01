#include "snnopt/simulator.hpp"

#include <algorithm>

#include "snnopt/error.hpp"

namespace snnopt {
namespace {

void avg_pool_forward(const LayerSpec& layer, const Shape& in, std::span<const double> input,
                      std::vector<double>& out) {
  const int k = layer.kernel;
  const int ho = in.height / k;
  const int wo = in.width / k;
  const double scale = 1.0 / (k * k);
  out.assign(static_cast<std::size_t>(in.channels) * ho * wo, 0.0);
  for (int c = 0; c < in.channels; ++c)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        double sum = 0.0;
        for (int dy = 0; dy < k; ++dy) {
          const double* row = input.data() + (static_cast<std::size_t>(c) * in.height + oy * k + dy) * in.width + ox * k;
          for (int dx = 0; dx < k; ++dx) sum += row[dx];
        }
        out[(static_cast<std::size_t>(c) * ho + oy) * wo + ox] = sum * scale;
      }
}

// Scatter formulation: every non-zero input contributes to the outputs it
// touches. Accumulation runs in an [oy][ox][o] buffer so the channel loop is
// contiguous for both weights (transposed to [i][ky][kx][o]) and outputs.
void conv_forward(const LayerSpec& layer, const Shape& in, const LayerParams& params, std::span<const double> input,
                  std::vector<double>& out) {
  const int k = layer.kernel, s = layer.stride, p = layer.padding;
  const int oc = layer.out_channels, ic = layer.in_channels;
  const int ho = (in.height + 2 * p - k) / s + 1;
  const int wo = (in.width + 2 * p - k) / s + 1;

  std::vector<double> wt(params.weight.size());
  for (int o = 0; o < oc; ++o)
    for (int i = 0; i < ic; ++i)
      for (int q = 0; q < k * k; ++q)
        wt[(static_cast<std::size_t>(i) * k * k + q) * oc + o] = params.weight[(static_cast<std::size_t>(o) * ic + i) * k * k + q];

  std::vector<double> acc(static_cast<std::size_t>(ho) * wo * oc, 0.0);
  for (int i = 0; i < ic; ++i)
    for (int iy = 0; iy < in.height; ++iy)
      for (int ix = 0; ix < in.width; ++ix) {
        const double v = input[(static_cast<std::size_t>(i) * in.height + iy) * in.width + ix];
        if (v == 0.0) continue;
        for (int ky = 0; ky < k; ++ky) {
          const int ny = iy + p - ky;
          if (ny < 0 || ny % s != 0 || ny / s >= ho) continue;
          const int oy = ny / s;
          for (int kx = 0; kx < k; ++kx) {
            const int nx = ix + p - kx;
            if (nx < 0 || nx % s != 0 || nx / s >= wo) continue;
            const int ox = nx / s;
            const double* w = wt.data() + (static_cast<std::size_t>(i) * k * k + ky * k + kx) * oc;
            double* a = acc.data() + (static_cast<std::size_t>(oy) * wo + ox) * oc;
            for (int o = 0; o < oc; ++o) a[o] += w[o] * v;
          }
        }
      }

  out.resize(static_cast<std::size_t>(oc) * ho * wo);
  for (int o = 0; o < oc; ++o)
    for (int q = 0; q < ho * wo; ++q)
      out[static_cast<std::size_t>(o) * ho * wo + q] = params.bias[o] + acc[static_cast<std::size_t>(q) * oc + o];
}

void fc_forward(const LayerSpec& layer, const LayerParams& params, std::span<const double> input,
                std::vector<double>& out) {
  const int n_in = layer.in_channels;
  std::vector<int> nz;
  nz.reserve(input.size());
  for (int i = 0; i < n_in; ++i)
    if (input[i] != 0.0) nz.push_back(i);
  out.resize(static_cast<std::size_t>(layer.out_channels));
  for (int o = 0; o < layer.out_channels; ++o) {
    const double* w = params.weight.data() + static_cast<std::size_t>(o) * n_in;
    double sum = 0.0;
    for (int i : nz) sum += w[i] * input[i];
    out[o] = params.bias[o] + sum;
  }
}

std::size_t count_lif_layers(const NetworkSpec& spec) {
  return static_cast<std::size_t>(
      std::count_if(spec.layers.begin(), spec.layers.end(), [](const LayerSpec& l) { return l.has_weights(); }));
}

}  // namespace

MembraneState MembraneState::reset(const NetworkSpec& spec) {
  const auto shapes = spec.output_shapes();
  MembraneState state;
  state.layers.reserve(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i)
    state.layers.emplace_back(spec.layers[i].has_weights() ? shapes[i].size() : 0);
  return state;
}

std::span<const double> lif_step(LifState& state, std::span<const double> input_current, const LifParams& params,
                                 const SpikeFunction& spike) {
  if (input_current.size() != state.potential.size())
    throw Error(ErrorCode::ShapeMismatch, "LIF input has " + std::to_string(input_current.size()) +
                                              " elements, state has " + std::to_string(state.potential.size()));
  const double leak = params.leak;
  const double th = params.v_threshold;
  for (std::size_t j = 0; j < input_current.size(); ++j) {
    double& v = state.potential[j];
    double& s = state.spikes[j];
    v = params.reset_mode == ResetMode::Zero ? leak * v * (1.0 - s) + input_current[j]
                                             : leak * (v - th * s) + input_current[j];
    s = spike(v, th);
  }
  return state.spikes;
}

void layer_forward(const LayerSpec& layer, const Shape& in_shape, const LayerParams& params,
                   std::span<const double> input, std::vector<double>& out) {
  if (input.size() != in_shape.size())
    throw Error(ErrorCode::ShapeMismatch, to_string(layer.kind) + " input has " + std::to_string(input.size()) +
                                              " elements, expected " + std::to_string(in_shape.size()));
  switch (layer.kind) {
    case LayerKind::AvgPool:
      if (in_shape.channels != layer.in_channels) throw Error(ErrorCode::ShapeMismatch, "pool channels");
      avg_pool_forward(layer, in_shape, input, out);
      return;
    case LayerKind::Conv:
      if (in_shape.channels != layer.in_channels || params.weight.size() != weight_count(layer) ||
          params.bias.size() != static_cast<std::size_t>(layer.out_channels))
        throw Error(ErrorCode::ShapeMismatch, "conv parameters");
      conv_forward(layer, in_shape, params, input, out);
      return;
    case LayerKind::FullyConnected:
      if (in_shape.size() != static_cast<std::size_t>(layer.in_channels) ||
          params.weight.size() != weight_count(layer) ||
          params.bias.size() != static_cast<std::size_t>(layer.out_channels))
        throw Error(ErrorCode::ShapeMismatch, "fully connected parameters");
      fc_forward(layer, params, input, out);
      return;
  }
}

std::vector<double> layer_forward(const LayerSpec& layer, const Shape& in_shape, const LayerParams& params,
                                  std::span<const double> input) {
  std::vector<double> out;
  layer_forward(layer, in_shape, params, input, out);
  return out;
}

ForwardResult forward(const NetworkSpec& spec, const WeightSet& weights, std::span<const double> inputs, int timesteps,
                      const ForwardOptions& options) {
  if (timesteps < 1) throw Error(ErrorCode::InvalidArgument, "timesteps must be >= 1");
  const Shape in_shape = spec.input_shape();
  if (inputs.size() != in_shape.size() * static_cast<std::size_t>(timesteps))
    throw Error(ErrorCode::ShapeMismatch, "input frames do not match the network input window");
  const auto shapes = spec.output_shapes();
  if (weights.layers.size() != spec.layers.size()) throw Error(ErrorCode::ShapeMismatch, "weight set layer count");
  if (count_lif_layers(spec) == 0 || !spec.layers.back().has_weights())
    throw Error(ErrorCode::ShapeMismatch, "network must end in a weighted layer");

  MembraneState state = MembraneState::reset(spec);
  ForwardResult result;
  result.timesteps = timesteps;
  result.counts.assign(shapes.back().size(), 0.0);
  if (options.record) {
    result.trace.inputs.resize(static_cast<std::size_t>(timesteps));
    result.trace.potentials.resize(static_cast<std::size_t>(timesteps));
    result.trace.spikes.resize(static_cast<std::size_t>(timesteps));
  }

  std::vector<double> x, current;
  for (int t = 0; t < timesteps; ++t) {
    x.assign(inputs.begin() + static_cast<std::ptrdiff_t>(in_shape.size() * t),
             inputs.begin() + static_cast<std::ptrdiff_t>(in_shape.size() * (t + 1)));
    if (options.record) {
      result.trace.inputs[t].resize(spec.layers.size());
      result.trace.potentials[t].resize(spec.layers.size());
      result.trace.spikes[t].resize(spec.layers.size());
    }
    Shape cur = in_shape;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
      const LayerSpec& layer = spec.layers[l];
      layer_forward(layer, cur, weights.layers[l], x, current);
      if (layer.has_weights()) {
        if (options.record) result.trace.inputs[t][l] = x;
        lif_step(state.layers[l], current, spec.lif, options.spike);
        x = state.layers[l].spikes;
        if (options.record) {
          result.trace.potentials[t][l] = state.layers[l].potential;
          result.trace.spikes[t][l] = state.layers[l].spikes;
        }
      } else {
        x.swap(current);
      }
      cur = shapes[l];
    }
    for (std::size_t c = 0; c < x.size(); ++c) result.counts[c] += x[c];
  }
  return result;
}

ForwardResult forward(const NetworkSpec& spec, const WeightSet& weights, const SpikeFrames& frames,
                      const ForwardOptions& options) {
  if (frames.window != spec.input_window)
    throw Error(ErrorCode::ShapeMismatch, "frames window " + std::to_string(frames.window) + " vs network window " +
                                              std::to_string(spec.input_window));
  std::vector<double> inputs(frames.data.begin(), frames.data.end());
  return forward(spec, weights, inputs, frames.timesteps, options);
}

Decoded decode(std::span<const double> counts, int timesteps) {
  if (timesteps < 1) throw Error(ErrorCode::InvalidArgument, "timesteps must be >= 1");
  Decoded d;
  d.rates.reserve(counts.size());
  for (double c : counts) d.rates.push_back(c / timesteps);
  for (std::size_t c = 1; c < d.rates.size(); ++c)
    if (d.rates[c] > d.rates[d.predicted]) d.predicted = static_cast<int>(c);
  return d;
}

}  // namespace snnopt
