// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "snnopt/checkpoint.hpp"
#include "snnopt/cost_models.hpp"
#include "snnopt/dse.hpp"
#include "snnopt/quantizer.hpp"
#include "snnopt/rng.hpp"
#include "snnopt/stbp.hpp"

using namespace snnopt;

namespace {

int failures = 0;

void report(int id, const std::string& name, const std::function<bool(std::ostringstream&)>& check) {
  std::ostringstream detail;
  bool ok = false;
  try {
    ok = check(detail);
  } catch (const std::exception& e) {
    detail << "exception: " << e.what();
  }
  if (!ok) ++failures;
  std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.str().c_str());
  std::fflush(stdout);
}

double memory_saving(int bits, int window) {
  return 100.0 * (1.0 - static_cast<double>(memory_of(build_network(window), bits)) /
                            static_cast<double>(memory_of(build_network(100), 32)));
}

double ops_reduction(int t, int w) {
  const double base = static_cast<double>(count_ops(build_network(100), 20).total());
  return 100.0 * (1.0 - static_cast<double>(count_ops(build_network(w), t).total()) / base);
}

bool memory_ratios(std::ostringstream& out) {
  struct Case {
    int bits, window;
    double expected;
  };
  const Case cases[] = {{16, 100, 50.00}, {12, 100, 62.50}, {10, 100, 68.75}, {32, 50, 91.42},
                        {16, 50, 95.71},  {12, 50, 96.78},  {10, 50, 97.32}};
  bool ok = true;
  out.precision(4);
  for (const auto& c : cases) {
    const double s = memory_saving(c.bits, c.window);
    ok &= std::abs(s - c.expected) <= 0.05;
    out << c.bits << "b_" << c.window << "w=" << s << "% ";
  }
  return ok;
}

bool op_counts(std::ostringstream& out) {
  bool ok = true;
  const int ts[] = {15, 10, 5};
  const double exact[] = {25, 50, 75}, approx[] = {85, 90, 95};
  out.precision(4);
  for (int i = 0; i < 3; ++i) {
    const double r100 = ops_reduction(ts[i], 100), r50 = ops_reduction(ts[i], 50);
    ok &= std::abs(r100 - exact[i]) < 1e-9 && std::abs(r50 - approx[i]) <= 3.0;
    out << ts[i] << "t_100w=" << r100 << "% " << ts[i] << "t_50w=" << r50 << "% ";
  }
  for (int t : {20, 15, 10, 5}) {
    const double lower = 100.0 * (1.0 - static_cast<double>(count_ops(build_network(50), t).total()) /
                                            static_cast<double>(count_ops(build_network(100), t).total()));
    ok &= std::abs(lower - 80.0) <= 5.0;
    if (t == 20) out << "50w vs 100w=" << lower << "% lower ";
  }
  for (double w1 : {100.0, 50.0})
    for (double t1 : {20.0, 15.0, 10.0, 5.0}) ok &= reduction_factor(100, w1, 20, t1) == (100 / w1) * (100 / w1) * (20 / t1);
  return ok;
}

bool architecture(std::ostringstream& out) {
  const int fc100 = build_network(100).layers[5].in_channels;
  const int fc50 = build_network(50).layers[5].in_channels;
  const int flat100 = static_cast<int>(build_network(100).output_shapes()[4].size());
  const int flat50 = static_cast<int>(build_network(50).output_shapes()[4].size());
  out << "FC1 in W=100: " << fc100 << " (flatten " << flat100 << "), W=50: " << fc50 << " (flatten " << flat50 << ")";
  return fc100 == 1152 && flat100 == 1152 && fc50 == 288 && flat50 == 288;
}

bool quantizer_oracles(std::ostringstream& out) {
  Rng rng(2024);
  const FixedPointFormat f{10, 7};
  const double step = f.step();
  std::size_t bound_violations = 0;
  for (int i = 0; i < 1000000; ++i) {
    const double w = rng.uniform(f.min_value(), f.max_value() - step);
    const double tr = w - quantize_value(w, f, Rounding::TR);
    const double rn = std::abs(w - quantize_value(w, f, Rounding::RN));
    if (!(tr >= 0 && tr < step) || !(rn <= step / 2)) ++bound_violations;
  }
  int sr_outside = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const double w = rng.uniform(-3.0, 3.0);
    const double frac = w / step - std::floor(w / step);
    const double sigma = step * std::sqrt(frac * (1 - frac)) / std::sqrt(100000.0);
    Rng draws(77 + trial);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) sum += quantize_value(w, f, Rounding::SR, &draws);
    if (std::abs(sum / 100000 - w) > 3 * sigma + 1e-15) ++sr_outside;
  }
  int not_idempotent = 0;
  const auto spec = build_network(100);
  const auto w = init_weights(spec, 5);
  for (Rounding r : {Rounding::TR, Rounding::RN})
    for (int bits : {4, 8, 10, 12, 16}) {
      QuantConfig q;
      q.bits = bits;
      q.rounding = r;
      const auto once = ptq(w, q).weights;
      if (ptq(once, q).weights != once) ++not_idempotent;
    }
  out << "TR/RN bound violations " << bound_violations << "/1e6, SR means outside 3 sigma " << sr_outside
      << "/5, non-idempotent PTQ cases " << not_idempotent << "/10";
  return bound_violations == 0 && sr_outside == 0 && not_idempotent == 0;
}

bool gradient_check(std::ostringstream& out) {
  NetworkSpec spec;
  spec.input_window = 4;
  spec.layers = {{LayerKind::Conv, 2, 3, 3, 1, 1},
                 {LayerKind::AvgPool, 3, 3, 2, 0, 2},
                 {LayerKind::FullyConnected, 12, 4, 0, 0, 1},
                 {LayerKind::FullyConnected, 4, 2, 0, 0, 1}};
  spec.lif.leak = 0.5;
  const int T = 3;
  const SpikeFunction relaxed{SpikeMode::Relaxed, 0.5};
  WeightSet w = init_weights(spec, 7);
  for (auto& l : w.layers)
    for (double& v : l.weight) v *= 3;
  Rng rng(11);
  std::vector<double> x(static_cast<std::size_t>(T) * spec.input_shape().size());
  for (double& v : x) v = rng.uniform();

  auto loss_of = [&](const WeightSet& ws) {
    ForwardOptions o;
    o.spike = relaxed;
    const auto r = forward(spec, ws, x, T, o);
    std::vector<double> rates;
    for (double c : r.counts) rates.push_back(c / T);
    return loss(rates, 1);
  };
  ForwardOptions o;
  o.spike = relaxed;
  o.record = true;
  const auto g = backward(spec, w, forward(spec, w, x, T, o).trace, 1, relaxed);
  const double h = 1e-4;
  double worst = 0.0;
  std::size_t checked = 0, nonzero = 0;
  for (std::size_t l = 0; l < w.layers.size(); ++l)
    for (int b = 0; b < 2; ++b) {
      auto& params = b ? w.layers[l].bias : w.layers[l].weight;
      const auto& grads = b ? g.weights.layers[l].bias : g.weights.layers[l].weight;
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double keep = params[i];
        params[i] = keep + h;
        const double up = loss_of(w);
        params[i] = keep - h;
        const double down = loss_of(w);
        params[i] = keep;
        const double fd = (up - down) / (2 * h);
        worst = std::max(worst, std::abs(fd - grads[i]) / std::max({std::abs(fd), std::abs(grads[i]), 1e-6}));
        ++checked;
        nonzero += grads[i] != 0.0;
      }
    }
  out << "max relative error " << worst << " over " << checked << " parameters (" << nonzero << " nonzero), T=" << T;
  return worst < 1e-3 && nonzero > 0;
}

// Shared by criteria 6 and 9.
struct GateRun {
  NetworkSpec spec;
  FrameSet train_set, test_set;
  TrainConfig config;
};

GateRun gate_setup() {
  GateRun g;
  SyntheticDatasetSpec ds;  // 100 train + 50 test per class
  ds.seed = 1;
  g.spec = build_network(50, true, LifParams{0.4, 0.9, ResetMode::Zero});
  g.train_set = prepare_frame_set(synthetic_split(ds, "train"), 50, 10);
  g.test_set = prepare_frame_set(synthetic_split(ds, "test"), 50, 10);
  g.config.epochs = 30;
  g.config.learning_rate = 0.01;
  g.config.seed = 1;
  g.config.timesteps = 10;
  g.config.window = 50;
  return g;
}

const GateRun& gate() {
  static const GateRun g = gate_setup();
  return g;
}

const TrainResult& gate_result() {
  static const TrainResult r = train(gate().spec, gate().train_set, gate().test_set, gate().config);
  return r;
}

bool training_gate(std::ostringstream& out) {
  const auto& g = gate();
  const auto& r = gate_result();
  const double full = evaluate(g.spec, r.weights, g.test_set);
  QuantConfig q;
  q.bits = 10;
  const double b10 = evaluate(g.spec, ptq(r.weights, q).weights, g.test_set);
  q.bits = 4;
  const double b4 = evaluate(g.spec, ptq(r.weights, q).weights, g.test_set);
  out << "train " << g.train_set.size() << " test " << g.test_set.size() << ", fp " << full << ", 10b " << b10
      << " (drop " << full - b10 << "), 4b " << b4;
  return g.train_set.size() == 200 && g.test_set.size() == 100 && full >= 0.90 && full - b10 <= 0.02 && b4 < 0.60;
}

bool dse_selection(std::ostringstream& out) {
  const auto constants = shipped_constants();
  const auto points = points_from_table(shipped_accuracy_table(), GridConfig{}, constants);
  SelectionPolicy policy;
  policy.kind = SelectionPolicy::Kind::WithinTolerance;
  const auto a = select(points, parse_constraints({{"max_memory_mb", 8}, {"max_latency_ratio", 0.25}}), policy, constants);
  const auto b = select(points, parse_constraints({{"max_memory_mb", 1}, {"max_latency_ratio", 0.25}}), policy, constants);

  auto tags = [](const std::vector<DsePoint>& ps) {
    std::set<std::string> s;
    for (const auto& p : ps) s.insert(p.setting.tag());
    return s;
  };
  auto brute = [](const std::vector<DsePoint>& ps) {
    std::vector<DsePoint> front;
    for (const auto& p : ps) {
      bool dominated = false;
      for (const auto& q : ps) dominated |= dominates(q, p);
      if (!dominated) front.push_back(p);
    }
    return front;
  };
  int mismatches = tags(pareto_front(points)) != tags(brute(points));
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    std::vector<DsePoint> ps;
    for (int i = 0; i < 32; ++i) {
      DsePoint p;
      p.setting = {i, 1, 1};
      p.accuracy = static_cast<double>(rng.below(5));
      p.cost.memory_bits = rng.below(5);
      p.cost.latency_units = static_cast<double>(rng.below(5));
      p.cost.energy_units = static_cast<double>(rng.below(5));
      ps.push_back(p);
    }
    mismatches += tags(pareto_front(ps)) != tags(brute(ps));
  }
  out << "{8 MB, 0.25x} -> " << a.setting.tag() << ", {1 MB, 0.25x} -> " << b.setting.tag()
      << ", Pareto mismatches vs brute force " << mismatches << "/101";
  return a.setting.tag() == "10b_5t_100w" && b.setting.tag() == "10b_5t_50w" && mismatches == 0;
}

bool calibrated_costs(std::ostringstream& out) {
  const auto c = shipped_constants();
  const double speedup = full_report(32, 20, 100, c).latency_units / full_report(32, 5, 100, c).latency_units;
  const double energy = full_report(32, 20, 100, c).energy_units / full_report(10, 5, 100, c).energy_units;
  out << "latency speed-up 20t->5t " << speedup << "x, energy improvement 10b_5t_100w " << energy << "x (model units)";
  return speedup >= 3.5 && speedup <= 4.0 && energy >= 3.8 && energy <= 4.3;
}

bool determinism(std::ostringstream& out) {
  const auto& g = gate();
  TrainConfig c = g.config;
  c.workers = 2;
  const TrainResult again = train(g.spec, g.train_set, g.test_set, c);
  const auto ckpt = [&](const WeightSet& w) { return encode_checkpoint(Checkpoint{g.spec, w, "fp32", c.seed, {}}); };
  const bool same_ckpt = ckpt(gate_result().weights) == ckpt(again.weights);
  const bool same_log = format_train_log(gate_result().log) == format_train_log(again.log);

  SyntheticDatasetSpec ds;
  ds.train_per_class = 10;
  ds.test_per_class = 10;
  const GridConfig grid{{32, 10, 4}, {10, 5}, {50}};
  std::map<int, std::vector<EventSample>> train_map{{50, synthetic_split(ds, "train")}};
  std::map<int, std::vector<EventSample>> test_map{{50, synthetic_split(ds, "test")}};
  TrainConfig tc;
  tc.epochs = 2;
  tc.learning_rate = 0.01;
  const LifParams lif{0.4, 0.9};
  auto dse_csv = [&](std::size_t workers) {
    tc.workers = workers;
    DseOptions opt;
    opt.constants = shipped_constants();
    opt.lif = lif;
    opt.workers = workers;
    return format_results_csv(run_dse(test_map, train_baselines(train_map, grid, tc, lif), grid, opt), opt.constants);
  };
  const std::string csv1 = dse_csv(1);
  const bool same_csv = csv1 == dse_csv(1) && csv1 == dse_csv(3);
  out << "checkpoint bytes " << (same_ckpt ? "identical" : "differ") << ", train log "
      << (same_log ? "identical" : "differs") << ", DSE CSV across runs and 1/3 workers "
      << (same_csv ? "identical" : "differs");
  return same_ckpt && same_log && same_csv;
}

}  // namespace

int main() {
  report(1, "memory-ratio reproduction", memory_ratios);
  report(2, "op-count reproduction", op_counts);
  report(3, "architecture shape check", architecture);
  report(4, "quantizer oracles", quantizer_oracles);
  report(5, "gradient check", gradient_check);
  report(6, "desk-scale training gate", training_gate);
  report(7, "DSE constraint reproduction", dse_selection);
  report(8, "calibrated cost models", calibrated_costs);
  report(9, "determinism", determinism);
  return failures == 0 ? 0 : 1;
}
