#include <gtest/gtest.h>

#include <cmath>

#include "snnopt/error.hpp"
#include "snnopt/network.hpp"
#include "snnopt/parallel.hpp"
#include "snnopt/rng.hpp"
#include "snnopt/simulator.hpp"

using namespace snnopt;

TEST(Architecture, Window100) {
  const auto spec = build_network(100);
  const auto shapes = spec.output_shapes();
  std::vector<int> spatial;
  for (const auto& s : shapes) spatial.push_back(s.height);
  EXPECT_EQ(spatial, (std::vector<int>{25, 25, 12, 12, 6, 1, 1}));
  EXPECT_EQ(spec.layers[5].in_channels, 1152);
  EXPECT_EQ(spec.layers[5].out_channels, 512);
  EXPECT_EQ(spec.num_classes(), 2);
  EXPECT_EQ(weight_count(spec), 600640u);
}

TEST(Architecture, Window50) {
  const auto spec = build_network(50);
  EXPECT_EQ(spec.layers[5].in_channels, 288);
  EXPECT_EQ(spec.layers[5].out_channels, 144);
  EXPECT_EQ(weight_count(spec), 51552u);
  EXPECT_EQ(weight_count(spec, true), 51552u + 32 + 32 + 144 + 2);
}

TEST(Architecture, StrictRejectsOtherWindows) {
  EXPECT_THROW(build_network(64), Error);
  const auto spec = build_network(64, false);
  EXPECT_EQ(spec.layers[5].in_channels, 32 * 4 * 4);
  EXPECT_EQ(spec.layers[5].out_channels, 256);
}

TEST(Weights, InitIsSeededAndBounded) {
  const auto spec = build_network(50);
  const auto a = init_weights(spec, 3);
  EXPECT_EQ(a, init_weights(spec, 3));
  EXPECT_NE(a, init_weights(spec, 4));
  const double bound = std::sqrt(1.0 / 288);
  for (double w : a.layers[5].weight) EXPECT_LE(std::abs(w), bound);
  EXPECT_NO_THROW(validate_weights(spec, a));
  auto bad = a;
  bad.layers[1].weight.pop_back();
  EXPECT_THROW(validate_weights(spec, bad), Error);
  bad = a;
  bad.layers[1].weight[0] = std::nan("");
  EXPECT_THROW(validate_weights(spec, bad), Error);
}

TEST(Lif, ZeroInputStaysAtRest) {
  LifState s(1);
  const std::vector<double> in{0.0};
  lif_step(s, in, {});
  EXPECT_EQ(s.potential[0], 0.0);
  EXPECT_EQ(s.spikes[0], 0.0);
}

TEST(Lif, ThresholdEqualityFiresThenResets) {
  LifParams p{1.0, 0.0, ResetMode::Zero};
  LifState s(1);
  const std::vector<double> one{1.0}, zero{0.0};
  lif_step(s, one, p);
  EXPECT_EQ(s.spikes[0], 1.0);
  lif_step(s, zero, p);
  EXPECT_EQ(s.potential[0], 0.0);
  EXPECT_EQ(s.spikes[0], 0.0);
}

TEST(Lif, HandEvaluatedRecurrence) {
  LifParams p{1.0, 0.5, ResetMode::Zero};
  LifState s(1);
  const std::vector<double> a{0.6}, b{0.8};
  lif_step(s, a, p);
  EXPECT_DOUBLE_EQ(s.potential[0], 0.6);
  EXPECT_EQ(s.spikes[0], 0.0);
  lif_step(s, b, p);
  EXPECT_DOUBLE_EQ(s.potential[0], 1.1);
  EXPECT_EQ(s.spikes[0], 1.0);
}

TEST(Lif, SubtractReset) {
  LifParams p{1.0, 0.5, ResetMode::Subtract};
  LifState s(1);
  const std::vector<double> a{1.5}, b{0.2};
  lif_step(s, a, p);
  EXPECT_EQ(s.spikes[0], 1.0);
  lif_step(s, b, p);
  EXPECT_DOUBLE_EQ(s.potential[0], 0.5 * (1.5 - 1.0) + 0.2);
}

TEST(Lif, NoLeakIntegratesSubThreshold) {
  LifParams p{100.0, 0.0, ResetMode::Zero};
  p.leak = 0.0;
  // leak = 0 forgets everything; use a leak just below 1 instead for the sum.
  LifParams q{100.0, 0.999999999, ResetMode::Zero};
  LifState s(1);
  double sum = 0.0;
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const std::vector<double> in{rng.uniform()};
    sum = q.leak * sum + in[0];
    lif_step(s, in, q);
    EXPECT_NEAR(s.potential[0], sum, 1e-12);
  }
  LifState z(1);
  const std::vector<double> a{0.3}, b{0.2};
  lif_step(z, a, p);
  lif_step(z, b, p);
  EXPECT_DOUBLE_EQ(z.potential[0], 0.2);
}

TEST(Lif, PotentialBoundedInZeroReset) {
  LifParams p{0.4, 0.25, ResetMode::Zero};
  LifState s(64);
  Rng rng(9);
  double max_in = 0.0;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> in(64);
    for (double& v : in) {
      v = rng.uniform(-1.0, 1.0);
      max_in = std::max(max_in, std::abs(v));
    }
    lif_step(s, in, p);
    for (double v : s.potential) EXPECT_LE(v, p.v_threshold + max_in);
  }
}

TEST(LifParams, Validation) {
  EXPECT_THROW((LifParams{0.0, 0.25}).validate(), Error);
  EXPECT_THROW((LifParams{0.4, 1.0}).validate(), Error);
  EXPECT_NO_THROW((LifParams{0.4, 0.0}).validate());
}

TEST(Layers, AvgPoolOfOnes) {
  const LayerSpec pool{LayerKind::AvgPool, 1, 1, 2, 0, 2};
  const std::vector<double> in(4, 1.0);
  const auto out = layer_forward(pool, {1, 2, 2}, {}, in);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0], 1.0);
}

TEST(Layers, AvgPoolFloorsOddSizes) {
  const LayerSpec pool{LayerKind::AvgPool, 1, 1, 2, 0, 2};
  std::vector<double> in(25);
  for (int i = 0; i < 25; ++i) in[i] = i;
  const auto out = layer_forward(pool, {1, 5, 5}, {}, in);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_DOUBLE_EQ(out[0], (0 + 1 + 5 + 6) / 4.0);
  EXPECT_DOUBLE_EQ(out[3], (12 + 13 + 17 + 18) / 4.0);
}

TEST(Layers, DeltaKernelSumsChannels) {
  const LayerSpec conv{LayerKind::Conv, 2, 1, 3, 1, 1};
  LayerParams p;
  p.weight.assign(18, 0.0);
  p.weight[4] = 1.0;      // centre of channel 0
  p.weight[9 + 4] = 1.0;  // centre of channel 1
  p.bias = {0.0};
  Rng rng(2);
  std::vector<double> in(2 * 4 * 4);
  for (double& v : in) v = rng.uniform();
  const auto out = layer_forward(conv, {2, 4, 4}, p, in);
  for (int i = 0; i < 16; ++i) EXPECT_DOUBLE_EQ(out[i], in[i] + in[16 + i]);
}

TEST(Layers, ConvMatchesNaiveLoops) {
  const LayerSpec conv{LayerKind::Conv, 3, 4, 3, 1, 1};
  const int H = 6, W = 6;
  Rng rng(17);
  LayerParams p;
  p.weight.resize(4 * 3 * 9);
  p.bias.resize(4);
  for (double& w : p.weight) w = rng.uniform(-1, 1);
  for (double& b : p.bias) b = rng.uniform(-1, 1);
  std::vector<double> in(3 * H * W);
  // Mix zeros in so the sparse path is exercised.
  for (double& v : in) v = rng.uniform() < 0.4 ? 0.0 : rng.uniform(-1, 1);
  const auto out = layer_forward(conv, {3, H, W}, p, in);
  ASSERT_EQ(out.size(), 4u * H * W);
  for (int o = 0; o < 4; ++o)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double ref = p.bias[o];
        for (int i = 0; i < 3; ++i)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int iy = y + ky - 1, ix = x + kx - 1;
              if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
              ref += p.weight[((o * 3 + i) * 3 + ky) * 3 + kx] * in[(i * H + iy) * W + ix];
            }
        EXPECT_NEAR(out[(o * H + y) * W + x], ref, 1e-12);
      }
}

TEST(Layers, StridedConvShape) {
  const LayerSpec conv{LayerKind::Conv, 1, 1, 3, 0, 2};
  const auto out = layer_forward(conv, {1, 7, 7}, {std::vector<double>(9, 1.0), {0.0}}, std::vector<double>(49, 1.0));
  ASSERT_EQ(out.size(), 9u);
  for (double v : out) EXPECT_DOUBLE_EQ(v, 9.0);
}

TEST(Layers, FullyConnected) {
  const LayerSpec fc{LayerKind::FullyConnected, 3, 2, 0, 0, 1};
  const LayerParams p{{1, 2, 3, -1, 0, 1}, {0.5, -0.5}};
  const auto out = layer_forward(fc, {3, 1, 1}, p, std::vector<double>{1, 0, 2});
  EXPECT_DOUBLE_EQ(out[0], 1 + 6 + 0.5);
  EXPECT_DOUBLE_EQ(out[1], -1 + 2 - 0.5);
}

TEST(Forward, ZeroFramesZeroBiasesGiveNoSpikes) {
  const auto spec = build_network(50);
  auto w = init_weights(spec, 1);
  for (auto& l : w.layers) std::fill(l.bias.begin(), l.bias.end(), 0.0);
  const auto r = forward(spec, w, SpikeFrames(10, 50));
  EXPECT_EQ(r.counts, (std::vector<double>{0.0, 0.0}));
}

TEST(Forward, SingleStepMatchesManualPipeline) {
  const auto spec = build_network(50);
  auto w = init_weights(spec, 2);
  for (auto& l : w.layers)
    for (double& v : l.weight) v *= 4;
  const auto frames = prepare_frames(generate_synthetic(1, 3), 50, 1);
  const auto r = forward(spec, w, frames);

  const auto shapes = spec.output_shapes();
  std::vector<double> x(frames.data.begin(), frames.data.end());
  Shape in = spec.input_shape();
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    x = layer_forward(spec.layers[l], in, w.layers[l], x);
    if (spec.layers[l].has_weights()) {
      LifState s(x.size());
      lif_step(s, x, spec.lif);
      x = s.spikes;
    }
    in = shapes[l];
  }
  EXPECT_EQ(r.counts, x);
}

TEST(Forward, DeterministicAcrossThreads) {
  const auto spec = build_network(50);
  const auto w = init_weights(spec, 5);
  std::vector<SpikeFrames> frames;
  for (std::uint64_t i = 0; i < 8; ++i) frames.push_back(prepare_frames(generate_synthetic(i % 2, i), 50, 10));
  std::vector<std::vector<double>> serial(8), threaded(8);
  parallel_for(8, 1, [&](std::size_t i) { serial[i] = forward(spec, w, frames[i]).counts; });
  parallel_for(8, 4, [&](std::size_t i) { threaded[i] = forward(spec, w, frames[i]).counts; });
  EXPECT_EQ(serial, threaded);
}

TEST(Forward, ScalingOutputWeightsKeepsArgmax) {
  const auto spec = build_network(50);
  auto w = init_weights(spec, 6);
  for (auto& l : w.layers)
    for (double& v : l.weight) v *= 3;
  const std::size_t last = spec.layers.size() - 1;
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto frames = prepare_frames(generate_synthetic(seed % 2, seed), 50, 10);
    const auto base = forward(spec, w, frames).counts;
    const bool interior = base[0] != base[1] && base[0] > 0 && base[0] < 10 && base[1] > 0 && base[1] < 10;
    if (!interior) continue;
    ++checked;
    auto scaled = w;
    for (double& v : scaled.layers[last].weight) v *= 1.5;
    for (double& v : scaled.layers[last].bias) v *= 1.5;
    EXPECT_EQ(decode(forward(spec, scaled, frames).counts, 10).predicted, decode(base, 10).predicted);
  }
  SUCCEED() << checked << " samples with interior counts";
}

TEST(Decode, Examples) {
  const auto d = decode(std::vector<double>{3, 7}, 10);
  EXPECT_EQ(d.predicted, 1);
  EXPECT_DOUBLE_EQ(d.rates[0], 0.3);
  EXPECT_DOUBLE_EQ(d.rates[1], 0.7);
  EXPECT_EQ(decode(std::vector<double>{5, 5}, 10).predicted, 0);
  EXPECT_EQ(decode(std::vector<double>{0, 0}, 10).predicted, 0);
}
