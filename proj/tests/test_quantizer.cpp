#include <gtest/gtest.h>

#include <cmath>

#include "snnopt/error.hpp"
#include "snnopt/quantizer.hpp"

using namespace snnopt;

namespace {

double saving(int bits, int window) {
  return 100.0 * (1.0 - static_cast<double>(memory_of(build_network(window), bits)) /
                            static_cast<double>(memory_of(build_network(100), 32)));
}

}  // namespace

TEST(Format, Examples) {
  EXPECT_EQ(choose_format(std::vector<double>{0.9, -0.2}, 8).frac_bits, 7);
  EXPECT_EQ(choose_format(std::vector<double>{3.2, 1.0}, 8).frac_bits, 5);
  EXPECT_EQ(choose_format(std::vector<double>{0.0, 0.0}, 4).frac_bits, 3);
  // -1 is representable with no integer bits; +1 is not.
  EXPECT_EQ(choose_format(std::vector<double>{-1.0}, 8).frac_bits, 7);
  EXPECT_EQ(choose_format(std::vector<double>{1.0}, 8).frac_bits, 6);
  EXPECT_EQ(choose_format(std::vector<double>{1.5}, 8).frac_bits, 6);
  EXPECT_EQ(choose_format(std::vector<double>{1e6}, 4).frac_bits, 0);
}

TEST(Format, Range) {
  const FixedPointFormat f{8, 5};
  EXPECT_DOUBLE_EQ(f.step(), 1.0 / 32);
  EXPECT_DOUBLE_EQ(f.min_value(), -4.0);
  EXPECT_DOUBLE_EQ(f.max_value(), 127.0 / 32);
}

TEST(Quantize, Examples) {
  const FixedPointFormat f{8, 1};
  EXPECT_EQ(quantize_value(0.75, f, Rounding::TR), 0.5);
  EXPECT_EQ(quantize_value(0.75, f, Rounding::RN), 1.0);
  EXPECT_EQ(quantize_value(-0.25, f, Rounding::RN), -0.5);
  EXPECT_EQ(quantize_value(-0.25, f, Rounding::TR), -0.5);
}

TEST(Quantize, StochasticMeanOfThreeQuarters) {
  const FixedPointFormat f{8, 1};
  Rng rng(42);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += quantize_value(0.75, f, Rounding::SR, &rng);
  EXPECT_NEAR(sum / n, 0.75, 0.01);
}

TEST(Quantize, StochasticNeedsGenerator) { EXPECT_THROW(quantize_value(0.3, {8, 4}, Rounding::SR), Error); }

TEST(Quantize, SaturationIsCounted) {
  const FixedPointFormat f{4, 3};
  QuantStats stats;
  EXPECT_EQ(quantize_value(5.0, f, Rounding::RN, nullptr, &stats), 7.0 / 8);
  EXPECT_EQ(quantize_value(-5.0, f, Rounding::RN, nullptr, &stats), -1.0);
  EXPECT_EQ(stats.saturated, 2u);
}

TEST(Quantize, ErrorBoundsOnRandomValues) {
  Rng rng(7);
  const FixedPointFormat f{10, 8};
  const double step = f.step();
  for (int i = 0; i < 1000000; ++i) {
    const double w = rng.uniform(f.min_value(), f.max_value() - step);
    const double tr = quantize_value(w, f, Rounding::TR);
    const double rn = quantize_value(w, f, Rounding::RN);
    ASSERT_GE(w - tr, 0.0);
    ASSERT_LT(w - tr, step);
    ASSERT_LE(std::abs(w - rn), step / 2);
  }
}

TEST(Quantize, StochasticUnbiasedWithinThreeSigma) {
  const FixedPointFormat f{6, 3};
  Rng pick(3);
  for (int trial = 0; trial < 10; ++trial) {
    const double w = pick.uniform(-3.5, 3.5);
    const double frac = w / f.step() - std::floor(w / f.step());
    const double sigma = f.step() * std::sqrt(frac * (1 - frac));
    Rng rng(100 + trial);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += quantize_value(w, f, Rounding::SR, &rng);
    EXPECT_LE(std::abs(sum / n - w), 3 * sigma / std::sqrt(n) + 1e-15) << "w = " << w;
  }
}

TEST(Ptq, IdempotentForTruncationAndNearest) {
  const auto spec = build_network(50);
  const auto w = init_weights(spec, 1);
  for (Rounding r : {Rounding::TR, Rounding::RN})
    for (int bits : {4, 8, 10, 16}) {
      QuantConfig q;
      q.bits = bits;
      q.rounding = r;
      const auto once = ptq(w, q).weights;
      EXPECT_EQ(ptq(once, q).weights, once) << to_string(r) << " " << bits;
    }
}

TEST(Ptq, IdempotentWhenTruncationReachesMinusOne) {
  WeightSet w;
  w.layers.push_back({{-0.999, 3.0 / 128, 0.5}, {}});
  QuantConfig q;
  q.bits = 8;
  const auto once = ptq(w, q).weights;
  EXPECT_EQ(once.layers[0].weight[0], -1.0);
  EXPECT_EQ(ptq(once, q).weights, once);
}

TEST(Ptq, ThirtyTwoBitsIsNearIdentity) {
  const auto spec = build_network(50);
  const auto w = init_weights(spec, 2);
  QuantConfig q;
  q.bits = 32;
  const auto out = ptq(w, q);
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    if (!out.formats[l]) continue;
    const int n = out.formats[l]->frac_bits;
    EXPECT_GE(n, 24);
    for (std::size_t i = 0; i < w.layers[l].weight.size(); ++i)
      EXPECT_LE(std::abs(out.weights.layers[l].weight[i] - w.layers[l].weight[i]), std::ldexp(1.0, -n));
  }
}

TEST(Ptq, TenBitTruncationOnGrid) {
  const auto spec = build_network(50);
  QuantConfig q;
  q.bits = 10;
  const auto out = ptq(init_weights(spec, 3), q);
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    if (!out.formats[l]) {
      EXPECT_FALSE(spec.layers[l].has_weights());
      continue;
    }
    const int n = out.formats[l]->frac_bits;
    for (double v : out.weights.layers[l].weight) EXPECT_EQ(std::ldexp(v, n), std::round(std::ldexp(v, n)));
    for (double v : out.weights.layers[l].bias) EXPECT_EQ(std::ldexp(v, n), std::round(std::ldexp(v, n)));
  }
  EXPECT_EQ(out.stats.saturated, 0u);
}

TEST(Ptq, BiasFlag) {
  const auto spec = build_network(50);
  const auto w = init_weights(spec, 4);
  QuantConfig q;
  q.bits = 6;
  q.quantize_bias = false;
  const auto out = ptq(w, q);
  EXPECT_EQ(out.weights.layers[1].bias, w.layers[1].bias);
  EXPECT_NE(out.weights.layers[1].weight, w.layers[1].weight);
}

TEST(Ptq, StochasticIsSeeded) {
  const auto spec = build_network(50);
  const auto w = init_weights(spec, 5);
  QuantConfig q;
  q.bits = 8;
  q.rounding = Rounding::SR;
  q.seed = 9;
  EXPECT_EQ(ptq(w, q).weights, ptq(w, q).weights);
  q.seed = 10;
  const auto other = ptq(w, q).weights;
  q.seed = 9;
  EXPECT_NE(ptq(w, q).weights, other);
}

TEST(Config, Validation) {
  QuantConfig q;
  q.bits = 1;
  EXPECT_THROW(q.validate(), Error);
  q.bits = 33;
  EXPECT_THROW(q.validate(), Error);
  EXPECT_EQ(rounding_from_string("SR"), Rounding::SR);
  EXPECT_THROW(rounding_from_string("XX"), Error);
}

TEST(Memory, WeightCounts) {
  EXPECT_EQ(memory_of(build_network(100), 32), 600640u * 32);
  EXPECT_EQ(memory_of(build_network(50), 10), 51552u * 10);
  EXPECT_DOUBLE_EQ(static_cast<double>(memory_of(build_network(100), 10)) / memory_of(build_network(100), 32), 0.3125);
}

TEST(Memory, ReferenceSavings) {
  EXPECT_NEAR(saving(16, 100), 50.00, 0.05);
  EXPECT_NEAR(saving(12, 100), 62.50, 0.05);
  EXPECT_NEAR(saving(10, 100), 68.75, 0.05);
  EXPECT_NEAR(saving(32, 50), 91.42, 0.05);
  EXPECT_NEAR(saving(16, 50), 95.71, 0.05);
  EXPECT_NEAR(saving(12, 50), 96.78, 0.05);
  EXPECT_NEAR(saving(10, 50), 97.32, 0.05);
}
