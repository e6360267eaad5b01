#include "snnopt/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "snnopt/error.hpp"

namespace snnopt {
namespace {

constexpr char kMagic[8] = {'S', 'N', 'N', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_tensor(std::vector<std::uint8_t>& out, const std::vector<double>& values) {
  for (double v : values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

}  // namespace

void to_json(nlohmann::json& j, const NetworkSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : spec.layers)
    layers.push_back({{"kind", to_string(l.kind)},
                      {"in", l.in_channels},
                      {"out", l.out_channels},
                      {"kernel", l.kernel},
                      {"padding", l.padding},
                      {"stride", l.stride}});
  j = {{"input_window", spec.input_window},
       {"input_channels", spec.input_channels},
       {"lif",
        {{"v_threshold", spec.lif.v_threshold},
         {"leak", spec.lif.leak},
         {"reset", spec.lif.reset_mode == ResetMode::Zero ? "zero" : "subtract"}}},
       {"layers", layers}};
}

void from_json(const nlohmann::json& j, NetworkSpec& spec) {
  spec = NetworkSpec{};
  j.at("input_window").get_to(spec.input_window);
  j.at("input_channels").get_to(spec.input_channels);
  const auto& lif = j.at("lif");
  lif.at("v_threshold").get_to(spec.lif.v_threshold);
  lif.at("leak").get_to(spec.lif.leak);
  const auto reset = lif.at("reset").get<std::string>();
  if (reset == "zero") spec.lif.reset_mode = ResetMode::Zero;
  else if (reset == "subtract") spec.lif.reset_mode = ResetMode::Subtract;
  else throw Error(ErrorCode::InvalidArgument, "unknown reset mode " + reset);
  for (const auto& l : j.at("layers")) {
    LayerSpec layer;
    layer.kind = layer_kind_from_string(l.at("kind").get<std::string>());
    l.at("in").get_to(layer.in_channels);
    l.at("out").get_to(layer.out_channels);
    l.at("kernel").get_to(layer.kernel);
    l.at("padding").get_to(layer.padding);
    l.at("stride").get_to(layer.stride);
    spec.layers.push_back(layer);
  }
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  validate_weights(ckpt.spec, ckpt.weights);
  nlohmann::json tensors = nlohmann::json::array();
  for (std::size_t l = 0; l < ckpt.weights.layers.size(); ++l) {
    const auto& p = ckpt.weights.layers[l];
    tensors.push_back({{"layer", l}, {"weight", p.weight.size()}, {"bias", p.bias.size()}});
  }
  nlohmann::json header = {{"spec", ckpt.spec},
                           {"precision", ckpt.precision},
                           {"seed", ckpt.seed},
                           {"dtype", "float32_le"},
                           {"tensors", tensors}};
  if (ckpt.quant)
    header["quant"] = {{"bits", ckpt.quant->bits},
                       {"rounding", to_string(ckpt.quant->rounding)},
                       {"frac_bits", ckpt.quant->frac_bits}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& p : ckpt.weights.layers) {
    put_tensor(out, p.weight);
    put_tensor(out, p.bias);
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw Error(ErrorCode::BadCheckpoint, "missing checkpoint magic");
  const std::size_t header_len = get_u32(bytes.data() + 8);
  if (bytes.size() < 12 + header_len) throw Error(ErrorCode::BadCheckpoint, "truncated header");

  Checkpoint ckpt;
  std::size_t expected = 0;
  try {
    const auto header =
        nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + static_cast<std::ptrdiff_t>(header_len));
    ckpt.spec = header.at("spec").get<NetworkSpec>();
    ckpt.precision = header.at("precision").get<std::string>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    if (header.contains("quant")) {
      const auto& q = header.at("quant");
      ckpt.quant = QuantHeader{q.at("bits").get<int>(), rounding_from_string(q.at("rounding").get<std::string>()),
                               q.at("frac_bits").get<std::vector<int>>()};
    }
    for (const auto& t : header.at("tensors")) {
      LayerParams p;
      p.weight.resize(t.at("weight").get<std::size_t>());
      p.bias.resize(t.at("bias").get<std::size_t>());
      expected += p.weight.size() + p.bias.size();
      ckpt.weights.layers.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadCheckpoint, std::string("header: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::BadCheckpoint, e.what());
  }
  if (bytes.size() != 12 + header_len + 4 * expected)
    throw Error(ErrorCode::BadCheckpoint, "payload size does not match the tensor list");

  const std::uint8_t* p = bytes.data() + 12 + header_len;
  for (auto& layer : ckpt.weights.layers)
    for (auto* tensor : {&layer.weight, &layer.bias})
      for (double& v : *tensor) {
        v = std::bit_cast<float>(get_u32(p));
        p += 4;
      }
  try {
    validate_weights(ckpt.spec, ckpt.weights);
  } catch (const Error& e) {
    throw Error(ErrorCode::BadCheckpoint, e.what());
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

Checkpoint quantized_checkpoint(const Checkpoint& source, const QuantizedWeights& q, const QuantConfig& config) {
  Checkpoint out = source;
  out.weights = q.weights;
  out.precision = std::to_string(config.bits) + "b";
  QuantHeader h{config.bits, config.rounding, {}};
  for (const auto& f : q.formats) h.frac_bits.push_back(f ? f->frac_bits : -1);
  out.quant = h;
  return out;
}

}  // namespace snnopt
