#include "snnopt/stbp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "snnopt/error.hpp"
#include "snnopt/parallel.hpp"
#include "snnopt/rng.hpp"

namespace snnopt {
namespace {

void pool_backward(const LayerSpec& layer, const Shape& in, std::span<const double> grad_out,
                   std::vector<double>& grad_in) {
  const int k = layer.kernel;
  const int ho = in.height / k;
  const int wo = in.width / k;
  const double scale = 1.0 / (k * k);
  grad_in.assign(in.size(), 0.0);
  for (int c = 0; c < in.channels; ++c)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        const double g = grad_out[(static_cast<std::size_t>(c) * ho + oy) * wo + ox] * scale;
        if (g == 0.0) continue;
        for (int dy = 0; dy < k; ++dy) {
          double* row = grad_in.data() + (static_cast<std::size_t>(c) * in.height + oy * k + dy) * in.width + ox * k;
          for (int dx = 0; dx < k; ++dx) row[dx] = g;
        }
      }
}

// Mirrors conv_forward's [oy][ox][o] / [i][ky][kx][o] layouts.
void conv_backward(const LayerSpec& layer, const Shape& in, const LayerParams& params, std::span<const double> input,
                   std::span<const double> delta, LayerParams& grad, std::vector<double>* grad_in) {
  const int k = layer.kernel, s = layer.stride, p = layer.padding;
  const int oc = layer.out_channels, ic = layer.in_channels;
  const int ho = (in.height + 2 * p - k) / s + 1;
  const int wo = (in.width + 2 * p - k) / s + 1;
  const std::size_t plane = static_cast<std::size_t>(ho) * wo;

  bool any = false;
  for (int o = 0; o < oc; ++o) {
    double sum = 0.0;
    for (std::size_t q = 0; q < plane; ++q) sum += delta[o * plane + q];
    grad.bias[o] += sum;
  }
  std::vector<double> dt(plane * oc);
  for (int o = 0; o < oc; ++o)
    for (std::size_t q = 0; q < plane; ++q) {
      dt[q * oc + o] = delta[o * plane + q];
      any = any || delta[o * plane + q] != 0.0;
    }
  if (grad_in) grad_in->assign(in.size(), 0.0);
  if (!any) return;

  const std::size_t taps = static_cast<std::size_t>(k) * k;
  std::vector<double> gwt(static_cast<std::size_t>(ic) * taps * oc, 0.0);
  std::vector<double> wt;
  if (grad_in) {
    wt.resize(params.weight.size());
    for (int o = 0; o < oc; ++o)
      for (int i = 0; i < ic; ++i)
        for (std::size_t q = 0; q < taps; ++q)
          wt[(i * taps + q) * oc + o] = params.weight[(static_cast<std::size_t>(o) * ic + i) * taps + q];
  }

  for (int i = 0; i < ic; ++i)
    for (int iy = 0; iy < in.height; ++iy)
      for (int ix = 0; ix < in.width; ++ix) {
        const double v = input[(static_cast<std::size_t>(i) * in.height + iy) * in.width + ix];
        double gin = 0.0;
        for (int ky = 0; ky < k; ++ky) {
          const int ny = iy + p - ky;
          if (ny < 0 || ny % s != 0 || ny / s >= ho) continue;
          const int oy = ny / s;
          for (int kx = 0; kx < k; ++kx) {
            const int nx = ix + p - kx;
            if (nx < 0 || nx % s != 0 || nx / s >= wo) continue;
            const int ox = nx / s;
            const double* d = dt.data() + (static_cast<std::size_t>(oy) * wo + ox) * oc;
            const std::size_t tap = i * taps + ky * k + kx;
            if (v != 0.0) {
              double* g = gwt.data() + tap * oc;
              for (int o = 0; o < oc; ++o) g[o] += d[o] * v;
            }
            if (grad_in) {
              const double* w = wt.data() + tap * oc;
              double dot = 0.0;
              for (int o = 0; o < oc; ++o) dot += w[o] * d[o];
              gin += dot;
            }
          }
        }
        if (grad_in) (*grad_in)[(static_cast<std::size_t>(i) * in.height + iy) * in.width + ix] = gin;
      }

  for (int o = 0; o < oc; ++o)
    for (int i = 0; i < ic; ++i)
      for (std::size_t q = 0; q < taps; ++q)
        grad.weight[(static_cast<std::size_t>(o) * ic + i) * taps + q] += gwt[(i * taps + q) * oc + o];
}

void fc_backward(const LayerSpec& layer, const LayerParams& params, std::span<const double> input,
                 std::span<const double> delta, LayerParams& grad, std::vector<double>* grad_in) {
  const int n_in = layer.in_channels;
  std::vector<int> nz;
  for (int i = 0; i < n_in; ++i)
    if (input[i] != 0.0) nz.push_back(i);
  if (grad_in) grad_in->assign(static_cast<std::size_t>(n_in), 0.0);
  for (int o = 0; o < layer.out_channels; ++o) {
    const double d = delta[o];
    grad.bias[o] += d;
    if (d == 0.0) continue;
    double* g = grad.weight.data() + static_cast<std::size_t>(o) * n_in;
    for (int i : nz) g[i] += d * input[i];
    if (grad_in) {
      const double* w = params.weight.data() + static_cast<std::size_t>(o) * n_in;
      double* gi = grad_in->data();
      for (int i = 0; i < n_in; ++i) gi[i] += w[i] * d;
    }
  }
}

void accumulate(WeightSet& into, const WeightSet& add) {
  for (std::size_t l = 0; l < into.layers.size(); ++l) {
    auto& a = into.layers[l];
    const auto& b = add.layers[l];
    for (std::size_t j = 0; j < a.weight.size(); ++j) a.weight[j] += b.weight[j];
    for (std::size_t j = 0; j < a.bias.size(); ++j) a.bias[j] += b.bias[j];
  }
}

void scale(WeightSet& w, double factor) {
  for (auto& l : w.layers) {
    for (double& v : l.weight) v *= factor;
    for (double& v : l.bias) v *= factor;
  }
}

}  // namespace

double surrogate_derivative(double v, double v_threshold, const SurrogateParams& params) {
  return std::abs(v - v_threshold) <= params.half_width ? 1.0 / (2.0 * params.half_width) : 0.0;
}

double loss(std::span<const double> rates, int label) {
  double sum = 0.0;
  for (std::size_t c = 0; c < rates.size(); ++c) {
    const double d = rates[c] - (static_cast<int>(c) == label ? 1.0 : 0.0);
    sum += d * d;
  }
  return rates.empty() ? 0.0 : sum / static_cast<double>(rates.size());
}

Gradients backward(const NetworkSpec& spec, const WeightSet& weights, const ForwardTrace& trace, int label,
                   const SpikeFunction& spike) {
  const auto shapes = spec.output_shapes();
  const std::size_t n_layers = spec.layers.size();
  const int timesteps = static_cast<int>(trace.inputs.size());
  if (timesteps == 0 || trace.potentials.size() != trace.inputs.size() || trace.spikes.size() != trace.inputs.size())
    throw Error(ErrorCode::MissingTrace, "forward pass was not recorded");
  for (int t = 0; t < timesteps; ++t)
    if (trace.inputs[t].size() != n_layers || trace.spikes[t].size() != n_layers ||
        trace.spikes[t].back().size() != shapes.back().size())
      throw Error(ErrorCode::MissingTrace, "incomplete trace at timestep " + std::to_string(t));

  const std::size_t n_classes = shapes.back().size();
  std::vector<double> rates(n_classes, 0.0);
  for (int t = 0; t < timesteps; ++t)
    for (std::size_t c = 0; c < n_classes; ++c) rates[c] += trace.spikes[t].back()[c];
  for (double& r : rates) r /= timesteps;

  Gradients out;
  out.weights = zero_weights(spec);
  out.loss = loss(rates, label);

  std::vector<double> d_out(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c)
    d_out[c] = 2.0 * (rates[c] - (static_cast<int>(c) == label ? 1.0 : 0.0)) /
               (static_cast<double>(n_classes) * timesteps);

  // Index of the lowest weighted layer: nothing below it needs a gradient.
  std::size_t first_weighted = 0;
  while (!spec.layers[first_weighted].has_weights()) ++first_weighted;

  const SurrogateParams surrogate{spike.half_width};
  const double leak = spec.lif.leak;
  const double th = spec.lif.v_threshold;
  std::vector<std::vector<double>> carry(n_layers);  // dL/dV_{t+1}
  for (std::size_t l = 0; l < n_layers; ++l)
    if (spec.layers[l].has_weights()) carry[l].assign(shapes[l].size(), 0.0);

  std::vector<double> g, g_next, dv;
  for (int t = timesteps - 1; t >= 0; --t) {
    g = d_out;
    for (std::size_t l = n_layers; l-- > first_weighted;) {
      const LayerSpec& layer = spec.layers[l];
      const Shape in_shape = l == 0 ? spec.input_shape() : shapes[l - 1];
      if (!layer.has_weights()) {
        pool_backward(layer, in_shape, g, g_next);
        g.swap(g_next);
        continue;
      }
      const auto& v = trace.potentials[t][l];
      const auto& s = trace.spikes[t][l];
      auto& c = carry[l];
      dv.resize(v.size());
      for (std::size_t j = 0; j < v.size(); ++j) {
        const double sd = surrogate_derivative(v[j], th, surrogate);
        if (spec.lif.reset_mode == ResetMode::Zero)
          dv[j] = (g[j] - c[j] * leak * v[j]) * sd + c[j] * leak * (1.0 - s[j]);
        else
          dv[j] = (g[j] - c[j] * leak * th) * sd + c[j] * leak;
      }
      c = dv;
      std::vector<double>* grad_in = l > first_weighted ? &g_next : nullptr;
      const auto& x = trace.inputs[t][l];
      if (layer.kind == LayerKind::Conv)
        conv_backward(layer, in_shape, weights.layers[l], x, dv, out.weights.layers[l], grad_in);
      else
        fc_backward(layer, weights.layers[l], x, dv, out.weights.layers[l], grad_in);
      if (grad_in) g.swap(g_next);
    }
  }
  return out;
}

FrameSet prepare_frame_set(std::span<const EventSample> samples, int window, int timesteps, WindowMode mode,
                           std::size_t workers) {
  FrameSet set;
  set.frames.resize(samples.size());
  set.labels.resize(samples.size());
  parallel_for(samples.size(), workers, [&](std::size_t i) {
    set.frames[i] = prepare_frames(samples[i], window, timesteps, mode);
    set.labels[i] = samples[i].label;
  });
  return set;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 0");
  if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (timesteps < 1) throw Error(ErrorCode::InvalidArgument, "timesteps must be >= 1");
  if (!(surrogate.half_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "surrogate half width must be > 0");
  if (!(learning_rate >= 0.0) || !(momentum >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative optimizer rate");
}

void sgd_step(WeightSet& weights, WeightSet& velocity, const WeightSet& gradient, double learning_rate,
              double momentum) {
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    auto update = [&](std::vector<double>& w, std::vector<double>& vel, const std::vector<double>& gr) {
      for (std::size_t j = 0; j < w.size(); ++j) {
        vel[j] = momentum * vel[j] + gr[j];
        w[j] -= learning_rate * vel[j];
      }
    };
    update(weights.layers[l].weight, velocity.layers[l].weight, gradient.layers[l].weight);
    update(weights.layers[l].bias, velocity.layers[l].bias, gradient.layers[l].bias);
  }
}

TrainResult train(const NetworkSpec& spec, const FrameSet& train_set, const FrameSet& test_set,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  return train(spec, init_weights(spec, config.seed), train_set, test_set, config, on_epoch);
}

TrainResult train(const NetworkSpec& spec, const WeightSet& initial, const FrameSet& train_set,
                  const FrameSet& test_set, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw Error(ErrorCode::EmptyDataset, "training split is empty");
  validate_weights(spec, initial);

  TrainResult result;
  result.weights = initial;
  WeightSet velocity = zero_weights(spec);
  const std::size_t n = train_set.size();
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const std::size_t slots = std::min(batch, std::max<std::size_t>(config.workers, 1));
  std::vector<WeightSet> per_sample(std::min(batch, n), zero_weights(spec));
  std::vector<double> sample_loss(per_sample.size());
  std::vector<int> sample_pred(per_sample.size());

  std::vector<std::size_t> order(n);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, {0x5b0f, static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    const double lr = config.learning_rate * (epoch >= config.lr_decay_epoch ? config.lr_decay : 1.0);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      parallel_for(count, slots, [&](std::size_t b) {
        const std::size_t idx = order[start + b];
        ForwardOptions fo;
        fo.record = true;
        fo.spike.half_width = config.surrogate.half_width;
        const ForwardResult fr = forward(spec, result.weights, train_set.frames[idx], fo);
        sample_pred[b] = decode(fr.counts, fr.timesteps).predicted;
        Gradients g = backward(spec, result.weights, fr.trace, train_set.labels[idx], fo.spike);
        sample_loss[b] = g.loss;
        per_sample[b] = std::move(g.weights);
      });
      WeightSet total = per_sample[0];
      for (std::size_t b = 1; b < count; ++b) accumulate(total, per_sample[b]);
      scale(total, 1.0 / static_cast<double>(count));
      sgd_step(result.weights, velocity, total, lr, config.momentum);
      for (std::size_t b = 0; b < count; ++b) {
        loss_sum += sample_loss[b];
        correct += sample_pred[b] == train_set.labels[order[start + b]] ? 1 : 0;
      }
    }

    EpochLog entry;
    entry.epoch = epoch + 1;
    entry.train_acc = static_cast<double>(correct) / static_cast<double>(n);
    entry.loss = loss_sum / static_cast<double>(n);
    entry.test_acc = test_set.empty() ? 0.0 : evaluate(spec, result.weights, test_set, config.workers);
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry, result.weights);
  }
  return result;
}

double evaluate(const NetworkSpec& spec, const WeightSet& weights, const FrameSet& data, std::size_t workers) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "evaluation split is empty");
  std::vector<char> hit(data.size(), 0);
  parallel_for(data.size(), workers, [&](std::size_t i) {
    const ForwardResult fr = forward(spec, weights, data.frames[i]);
    hit[i] = decode(fr.counts, fr.timesteps).predicted == data.labels[i];
  });
  const auto correct = std::count(hit.begin(), hit.end(), 1);
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::string format_train_log(std::span<const EpochLog> log) {
  std::string out = "epoch,train_acc,test_acc,loss\n";
  char line[160];
  for (const auto& e : log) {
    std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.9g\n", e.epoch, e.train_acc, e.test_acc, e.loss);
    out += line;
  }
  return out;
}

}  // namespace snnopt
