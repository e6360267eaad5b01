#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "snnopt/event_io.hpp"
#include "snnopt/network.hpp"
#include "snnopt/simulator.hpp"

namespace snnopt {

struct SurrogateParams {
  double half_width = 0.5;  // a
};

/// Rectangular surrogate: 1/(2a) inside |v - V_th| <= a, else 0.
double surrogate_derivative(double v, double v_threshold, const SurrogateParams& params = {});

/// Mean squared error between firing rates and the one-hot target.
double loss(std::span<const double> rates, int label);

struct Gradients {
  WeightSet weights;  // same shapes as the parameters
  double loss = 0.0;
};

/// Backpropagation through time and layers over a recorded forward pass.
/// The spike nonlinearity is differentiated with the rectangular surrogate
/// (half width = spike.half_width) in both modes; in relaxed mode this is the
/// exact derivative of the forward ramp.
Gradients backward(const NetworkSpec& spec, const WeightSet& weights, const ForwardTrace& trace, int label,
                   const SpikeFunction& spike = {});

/// Binned inputs for one (T, W) setting.
struct FrameSet {
  std::vector<SpikeFrames> frames;
  std::vector<int> labels;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
};

FrameSet prepare_frame_set(std::span<const EventSample> samples, int window, int timesteps,
                           WindowMode mode = WindowMode::PerSample, std::size_t workers = 1);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 16;
  double learning_rate = 0.1;
  double momentum = 0.9;
  int lr_decay_epoch = 120;  // learning rate x lr_decay from this epoch on
  double lr_decay = 0.1;
  std::uint64_t seed = 0;
  int timesteps = 20;
  int window = 100;
  SurrogateParams surrogate{};
  std::size_t workers = 1;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  WeightSet weights;
  std::vector<EpochLog> log;
};

/// Called after every epoch with the current weights.
using EpochCallback = std::function<void(const EpochLog&, const WeightSet&)>;

/// Minibatch SGD with momentum from init_weights(spec, config.seed). The
/// batch gradient is the mean of per-sample gradients summed in sample
/// order, so results do not depend on the worker count. test_set may be
/// empty (test_acc is then logged as 0).
TrainResult train(const NetworkSpec& spec, const FrameSet& train_set, const FrameSet& test_set,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});
TrainResult train(const NetworkSpec& spec, const WeightSet& initial, const FrameSet& train_set,
                  const FrameSet& test_set, const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Applies one SGD-with-momentum update in place.
void sgd_step(WeightSet& weights, WeightSet& velocity, const WeightSet& gradient, double learning_rate,
              double momentum);

/// Fraction of correctly decoded samples.
double evaluate(const NetworkSpec& spec, const WeightSet& weights, const FrameSet& data, std::size_t workers = 1);

/// CSV `epoch,train_acc,test_acc,loss`.
std::string format_train_log(std::span<const EpochLog> log);

}  // namespace snnopt
