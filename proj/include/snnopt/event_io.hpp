#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace snnopt {

inline constexpr std::uint32_t kDefaultDurationUs = 100'000;
/// x and y occupy 14 bits each in a DAT record.
inline constexpr int kMaxSensorDim = 1 << 14;

struct Event {
  std::uint32_t t = 0;  // microseconds
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint8_t polarity = 0;  // 0 = negative, 1 = positive

  friend bool operator==(const Event&, const Event&) = default;
};

struct EventSample {
  std::vector<Event> events;  // non-decreasing t, all t < duration_us
  int sensor_width = 0;
  int sensor_height = 0;
  std::uint32_t duration_us = kDefaultDurationUs;
  int label = 0;

  friend bool operator==(const EventSample&, const EventSample&) = default;
};

struct AttentionWindow {
  int x0 = 0;
  int y0 = 0;
  int size = 0;

  friend bool operator==(const AttentionWindow&, const AttentionWindow&) = default;
};

/// Binary spike tensor laid out as [timestep][polarity][y][x].
struct SpikeFrames {
  int timesteps = 0;
  int window = 0;
  std::vector<std::uint8_t> data;

  SpikeFrames() = default;
  SpikeFrames(int timesteps, int window)
      : timesteps(timesteps),
        window(window),
        data(static_cast<std::size_t>(timesteps) * 2 * window * window, 0) {}

  std::size_t index(int t, int p, int y, int x) const {
    return ((static_cast<std::size_t>(t) * 2 + p) * window + y) * window + x;
  }
  std::uint8_t at(int t, int p, int y, int x) const { return data[index(t, p, y, x)]; }
  /// One timestep, 2 * window * window values.
  std::span<const std::uint8_t> frame(int t) const {
    const std::size_t n = static_cast<std::size_t>(2) * window * window;
    return {data.data() + static_cast<std::size_t>(t) * n, n};
  }
};

// DAT: '%'-prefixed ASCII header lines ("% width N", "% height N",
// "% duration_us N", "% label N", terminated by an optional "% end"), then
// 8-byte records: word0 = t (LE u32), word1 = x | y << 14 | p << 28.
// Sensor dimensions missing from the header are inferred from the events.
EventSample parse_dat(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_dat(const EventSample& sample);

// CSV: optional "# key value" metadata lines (same keys as DAT), optional
// "t_us,x,y,p" header, then one event per row.
EventSample parse_csv(std::string_view text);
std::string write_csv(const EventSample& sample);

/// Reads a .dat or .csv file, dispatching on the extension.
EventSample read_event_file(const std::filesystem::path& path);
void write_event_file(const std::filesystem::path& path, const EventSample& sample);

/// Exact densest size x size placement. Ties prefer the smallest y0, then x0.
AttentionWindow find_attention_window(const EventSample& sample, int size);
/// Window centred on the sensor, independent of the events.
AttentionWindow center_window(const EventSample& sample, int size);

/// Keeps events inside the window and re-bases them to its origin.
EventSample crop(const EventSample& sample, const AttentionWindow& window);

/// Bins a square sample into T equal time slices with OR accumulation.
SpikeFrames bin_to_frames(const EventSample& sample, int timesteps);

enum class WindowMode { PerSample, FixedCenter };

/// Window search, crop and binning in one step.
SpikeFrames prepare_frames(const EventSample& sample, int window, int timesteps,
                           WindowMode mode = WindowMode::PerSample);

struct SyntheticOptions {
  int sensor_width = 120;
  int sensor_height = 100;
  std::uint32_t duration_us = kDefaultDurationUs;
  int bar_height = 40;
  /// Mean background-noise event count for class 1; class 0 carries the
  /// bar's expected count on top so both classes have matched rates.
  int noise_events = 1500;
};

/// class 0: uniform noise. class 1: vertical bar sweeping horizontally
/// (positive events) plus noise. Deterministic in (class_id, seed).
EventSample generate_synthetic(int class_id, std::uint64_t seed, const SyntheticOptions& options = {});

struct ManifestEntry {
  std::string file;
  int label = 0;
  std::string split;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dataset_dir);

/// Loads every manifest entry of `split`, in manifest order.
std::vector<EventSample> load_dataset(const std::filesystem::path& dataset_dir, std::string_view split,
                                      std::size_t workers = 1);

struct SyntheticDatasetSpec {
  int classes = 2;
  int train_per_class = 100;
  int test_per_class = 50;
  std::uint64_t seed = 0;
  SyntheticOptions options{};
};

/// In-memory synthetic split; sample i of class c uses a seed derived from
/// (spec.seed, split, c, i). Classes are interleaved.
std::vector<EventSample> synthetic_split(const SyntheticDatasetSpec& spec, std::string_view split);

/// Writes synthetic DAT files plus manifest.json under `dir`.
void write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticDatasetSpec& spec);

}  // namespace snnopt
