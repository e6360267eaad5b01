#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snnopt/network.hpp"
#include "snnopt/rng.hpp"

namespace snnopt {

/// Signed B-bit fixed point with n fractional bits: the integer grid
/// [-2^(B-1), 2^(B-1) - 1] scaled by 2^-n.
struct FixedPointFormat {
  int total_bits = 32;
  int frac_bits = 31;

  double step() const;
  double min_value() const;
  double max_value() const;
  friend bool operator==(const FixedPointFormat&, const FixedPointFormat&) = default;
};

enum class Rounding { TR, RN, SR };

std::string to_string(Rounding r);
Rounding rounding_from_string(const std::string& name);

struct QuantConfig {
  int bits = 32;
  Rounding rounding = Rounding::TR;
  std::uint64_t seed = 0;  // SR only; layer l draws from seed ^ l
  bool quantize_bias = true;

  void validate() const;
};

/// n = B - 1 - max(0, k), clamped to [0, B - 1], where k is the integer-bit
/// count the tensor needs: ceil(log2(max_pos + 1e-12)) for the positive side
/// and ceil(log2(|min_neg|)) for the negative side (which reaches -2^k
/// exactly). An all-zero tensor gets n = B - 1.
FixedPointFormat choose_format(std::span<const double> values, int bits);

struct QuantStats {
  std::size_t saturated = 0;
};

/// TR floors, RN rounds half away from zero, SR rounds up with probability
/// equal to the fractional part. Out-of-range results saturate silently and
/// are counted in `stats`. `rng` is required for SR.
double quantize_value(double w, const FixedPointFormat& format, Rounding rounding, Rng* rng = nullptr,
                      QuantStats* stats = nullptr);

struct QuantizedWeights {
  WeightSet weights;  // grid-aligned reals
  std::vector<std::optional<FixedPointFormat>> formats;  // per layer; empty for pooling
  QuantStats stats;
};

/// Post-training quantization. One format per layer, chosen from its weights
/// (and biases when they are quantized too).
QuantizedWeights ptq(const WeightSet& weights, const QuantConfig& config);

/// Weight memory in bits: B x synaptic weight count (+ biases if asked).
std::uint64_t memory_of(const NetworkSpec& spec, int bits, bool include_bias = false);

}  // namespace snnopt
