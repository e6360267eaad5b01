#include "snnopt/cost_models.hpp"

#include <algorithm>
#include <fstream>

#include "snnopt/error.hpp"

namespace snnopt {

void CostConstants::validate() const {
  if (!(latency_fixed >= 0.0)) throw Error(ErrorCode::InvalidArgument, "latency_fixed must be >= 0");
  if (!(latency_per_op > 0.0) || !(energy_per_synop_32b > 0.0) || !(energy_per_neuron_update > 0.0))
    throw Error(ErrorCode::InvalidArgument, "per-op constants must be > 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be in [0, 1]");
}

void to_json(nlohmann::json& j, const CostConstants& c) {
  j = {{"latency_fixed", c.latency_fixed},
       {"latency_per_op", c.latency_per_op},
       {"energy_per_synop_32b", c.energy_per_synop_32b},
       {"alpha", c.alpha},
       {"energy_per_neuron_update", c.energy_per_neuron_update}};
}

void from_json(const nlohmann::json& j, CostConstants& c) {
  j.at("latency_fixed").get_to(c.latency_fixed);
  j.at("latency_per_op").get_to(c.latency_per_op);
  j.at("energy_per_synop_32b").get_to(c.energy_per_synop_32b);
  j.at("alpha").get_to(c.alpha);
  j.at("energy_per_neuron_update").get_to(c.energy_per_neuron_update);
}

CostConstants load_constants(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  try {
    CostConstants c = nlohmann::json::parse(in).get<CostConstants>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
}

CostConstants shipped_constants() {
  return load_constants(std::filesystem::path(SNNOPT_DATA_DIR) / "cost_constants.json");
}

OpCount count_ops(const NetworkSpec& spec, int timesteps) {
  if (timesteps < 1) throw Error(ErrorCode::InvalidArgument, "timesteps must be >= 1");
  const auto shapes = spec.output_shapes();
  OpCount ops;
  const auto T = static_cast<std::uint64_t>(timesteps);
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerSpec& layer = spec.layers[l];
    const auto out = static_cast<std::uint64_t>(shapes[l].size());
    LayerOps entry{layer.kind, 0, 0};
    switch (layer.kind) {
      case LayerKind::AvgPool:
        entry.synaptic_ops = out * static_cast<std::uint64_t>(layer.kernel * layer.kernel);
        break;
      case LayerKind::Conv:
        entry.synaptic_ops = out * static_cast<std::uint64_t>(layer.in_channels) * layer.kernel * layer.kernel;
        entry.neuron_ops = out;
        break;
      case LayerKind::FullyConnected:
        entry.synaptic_ops = static_cast<std::uint64_t>(layer.in_channels) * layer.out_channels;
        entry.neuron_ops = out;
        break;
    }
    entry.synaptic_ops *= T;
    entry.neuron_ops *= T;
    ops.synaptic_ops += entry.synaptic_ops;
    ops.neuron_ops += entry.neuron_ops;
    ops.per_layer.push_back(entry);
  }
  return ops;
}

double reduction_factor(double w0, double w1, double t0, double t1) {
  if (!(w0 > 0 && w1 > 0 && t0 > 0 && t1 > 0)) throw Error(ErrorCode::InvalidArgument, "factors must be positive");
  return (w0 / w1) * (w0 / w1) * (t0 / t1);
}

double latency_estimate(const OpCount& ops, const CostConstants& c) {
  return c.latency_fixed + c.latency_per_op * static_cast<double>(ops.synaptic_ops);
}

double energy_estimate(const OpCount& ops, int bits, const CostConstants& c) {
  const double per_synop = c.energy_per_synop_32b * (c.alpha + (1.0 - c.alpha) * bits / 32.0);
  return static_cast<double>(ops.synaptic_ops) * per_synop +
         static_cast<double>(ops.neuron_ops) * c.energy_per_neuron_update;
}

std::string setting_tag(int bits, int timesteps, int window) {
  return std::to_string(bits) + "b_" + std::to_string(timesteps) + "t_" + std::to_string(window) + "w";
}

void to_json(nlohmann::json& j, const CostReport& r) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : r.ops.per_layer)
    layers.push_back({{"kind", to_string(l.kind)}, {"synaptic_ops", l.synaptic_ops}, {"neuron_ops", l.neuron_ops}});
  j = {{"tag", r.tag},
       {"bits", r.bits},
       {"timesteps", r.timesteps},
       {"window", r.window},
       {"memory_bits", r.memory_bits},
       {"latency_units", r.latency_units},
       {"energy_units", r.energy_units},
       {"op_count", {{"synaptic_ops", r.ops.synaptic_ops}, {"neuron_ops", r.ops.neuron_ops}, {"per_layer", layers}}}};
}

CostReport full_report(const NetworkSpec& spec, int bits, int timesteps, int window, const CostConstants& c) {
  if (spec.input_window != window)
    throw Error(ErrorCode::ShapeMismatch, "network window " + std::to_string(spec.input_window) +
                                              " does not match " + std::to_string(window));
  CostReport r;
  r.tag = setting_tag(bits, timesteps, window);
  r.bits = bits;
  r.timesteps = timesteps;
  r.window = window;
  r.memory_bits = static_cast<std::uint64_t>(bits) * weight_count(spec);
  r.ops = count_ops(spec, timesteps);
  r.latency_units = latency_estimate(r.ops, c);
  r.energy_units = energy_estimate(r.ops, bits, c);
  return r;
}

CostReport full_report(int bits, int timesteps, int window, const CostConstants& c) {
  return full_report(build_network(window, false), bits, timesteps, window, c);
}

CostConstants calibrate(const CalibrationTargets& targets, const CostConstants& base) {
  const NetworkSpec spec = build_network(targets.window, false);
  const OpCount step = count_ops(spec, 1);
  const double syn = static_cast<double>(step.synaptic_ops);
  const double neu = static_cast<double>(step.neuron_ops);
  const double t0 = targets.baseline_timesteps;
  const double t1 = targets.reduced_timesteps;

  CostConstants c = base;
  // (F + p*t0*syn) / (F + p*t1*syn) = s  =>  F = p*syn*(t0 - s*t1) / (s - 1)
  const double s = targets.speedup;
  if (!(s > 1.0)) throw Error(ErrorCode::InvalidArgument, "speed-up target must be > 1");
  c.latency_fixed = std::max(0.0, c.latency_per_op * syn * (t0 - s * t1) / (s - 1.0));

  // t0*(syn*e + neu*en) * (b0-blend) / (t1*(syn*e*blend(b1) + neu*en)) = target, solved for alpha.
  const double e = c.energy_per_synop_32b;
  const double en = c.energy_per_neuron_update;
  const double b0 = targets.baseline_bits / 32.0;
  const double b1 = targets.reduced_bits / 32.0;
  const double g = targets.energy_improvement * t1 / t0;
  // g * (syn*e*(a + (1-a)*b1) + neu*en) = syn*e*(a + (1-a)*b0) + neu*en
  const double coeff = syn * e * (g * (1.0 - b1) - (1.0 - b0));
  const double rhs = syn * e * b0 + neu * en - g * (syn * e * b1 + neu * en);
  if (coeff == 0.0) throw Error(ErrorCode::InvalidArgument, "energy target does not constrain alpha");
  c.alpha = std::clamp(rhs / coeff, 0.0, 1.0);
  c.validate();
  return c;
}

}  // namespace snnopt
