#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "snnopt/network.hpp"
#include "snnopt/quantizer.hpp"

namespace snnopt {

struct QuantHeader {
  int bits = 32;
  Rounding rounding = Rounding::TR;
  std::vector<int> frac_bits;  // per layer, -1 for pooling layers

  friend bool operator==(const QuantHeader&, const QuantHeader&) = default;
};

struct Checkpoint {
  NetworkSpec spec;
  WeightSet weights;
  std::string precision = "fp32";  // "fp32" or "<B>b"
  std::uint64_t seed = 0;
  std::optional<QuantHeader> quant;
};

void to_json(nlohmann::json& j, const NetworkSpec& spec);
void from_json(const nlohmann::json& j, NetworkSpec& spec);

// Layout: "SNNCKPT1", u32 LE header length, compact JSON header, then every
// layer's weight and bias as LE float32 in layer order. Tensor values are
// stored as float32, so doubles round-trip to float precision only.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Checkpoint for a PTQ result; precision becomes "<B>b".
Checkpoint quantized_checkpoint(const Checkpoint& source, const QuantizedWeights& q, const QuantConfig& config);

}  // namespace snnopt
