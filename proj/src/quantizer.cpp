#include "snnopt/quantizer.hpp"

#include <algorithm>
#include <cmath>

#include "snnopt/error.hpp"

namespace snnopt {

double FixedPointFormat::step() const { return std::ldexp(1.0, -frac_bits); }

double FixedPointFormat::min_value() const { return -std::ldexp(1.0, total_bits - 1 - frac_bits); }

double FixedPointFormat::max_value() const {
  return std::ldexp(std::ldexp(1.0, total_bits - 1) - 1.0, -frac_bits);
}

std::string to_string(Rounding r) {
  switch (r) {
    case Rounding::TR: return "TR";
    case Rounding::RN: return "RN";
    case Rounding::SR: return "SR";
  }
  return "?";
}

Rounding rounding_from_string(const std::string& name) {
  if (name == "TR" || name == "tr") return Rounding::TR;
  if (name == "RN" || name == "rn") return Rounding::RN;
  if (name == "SR" || name == "sr") return Rounding::SR;
  throw Error(ErrorCode::InvalidArgument, "unknown rounding '" + name + "' (TR, RN or SR)");
}

void QuantConfig::validate() const {
  if (bits < 2 || bits > 32) throw Error(ErrorCode::InvalidArgument, "bits must be in [2, 32]");
}

FixedPointFormat choose_format(std::span<const double> values, int bits) {
  if (bits < 2 || bits > 32) throw Error(ErrorCode::InvalidArgument, "bits must be in [2, 32]");
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "cannot choose a format for an empty tensor");
  double max_pos = 0.0, max_neg = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite value");
    max_pos = std::max(max_pos, v);
    max_neg = std::max(max_neg, -v);
  }
  if (max_pos == 0.0 && max_neg == 0.0) return {bits, bits - 1};
  constexpr double kEps = 1e-12;
  int int_bits = 0;
  if (max_pos > 0.0) int_bits = std::max(int_bits, static_cast<int>(std::ceil(std::log2(max_pos + kEps))));
  if (max_neg > 0.0) int_bits = std::max(int_bits, static_cast<int>(std::ceil(std::log2(max_neg))));
  const int frac = std::clamp(bits - 1 - int_bits, 0, bits - 1);
  return {bits, frac};
}

double quantize_value(double w, const FixedPointFormat& format, Rounding rounding, Rng* rng, QuantStats* stats) {
  const double scaled = std::ldexp(w, format.frac_bits);
  double q = 0.0;
  switch (rounding) {
    case Rounding::TR: q = std::floor(scaled); break;
    case Rounding::RN: q = std::round(scaled); break;
    case Rounding::SR: {
      if (!rng) throw Error(ErrorCode::InvalidArgument, "stochastic rounding needs a generator");
      const double lo = std::floor(scaled);
      q = rng->uniform() < scaled - lo ? lo + 1.0 : lo;
      break;
    }
  }
  const double q_min = -std::ldexp(1.0, format.total_bits - 1);
  const double q_max = std::ldexp(1.0, format.total_bits - 1) - 1.0;
  if (q < q_min || q > q_max) {
    q = std::clamp(q, q_min, q_max);
    if (stats) ++stats->saturated;
  }
  return std::ldexp(q, -format.frac_bits);
}

QuantizedWeights ptq(const WeightSet& weights, const QuantConfig& config) {
  config.validate();
  QuantizedWeights out;
  out.weights = weights;
  out.formats.resize(weights.layers.size());
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    LayerParams& layer = out.weights.layers[l];
    if (layer.weight.empty()) continue;
    // One format per layer, covering the biases it will also be applied to.
    std::vector<double> params = layer.weight;
    if (config.quantize_bias) params.insert(params.end(), layer.bias.begin(), layer.bias.end());
    const FixedPointFormat format = choose_format(params, config.bits);
    out.formats[l] = format;
    Rng rng(config.seed ^ static_cast<std::uint64_t>(l));
    Rng* r = config.rounding == Rounding::SR ? &rng : nullptr;
    for (double& v : layer.weight) v = quantize_value(v, format, config.rounding, r, &out.stats);
    if (config.quantize_bias)
      for (double& v : layer.bias) v = quantize_value(v, format, config.rounding, r, &out.stats);
  }
  return out;
}

std::uint64_t memory_of(const NetworkSpec& spec, int bits, bool include_bias) {
  return static_cast<std::uint64_t>(bits) * weight_count(spec, include_bias);
}

}  // namespace snnopt
