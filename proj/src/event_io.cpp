#include "snnopt/event_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "snnopt/error.hpp"
#include "snnopt/parallel.hpp"
#include "snnopt/rng.hpp"

namespace snnopt {
namespace {

struct Metadata {
  int width = -1;
  int height = -1;
  std::uint32_t duration_us = kDefaultDurationUs;
  int label = 0;
};

bool parse_int(std::string_view s, long long& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Applies a "key value" metadata line. Unknown keys are comments.
// Returns false when a known key carries an invalid value.
bool apply_metadata(std::string_view body, Metadata& meta) {
  body = trim(body);
  const auto space = body.find_first_of(" \t");
  if (space == std::string_view::npos) return true;
  const std::string_view key = body.substr(0, space);
  const std::string_view value = trim(body.substr(space + 1));
  long long v = 0;
  if (key == "width" || key == "height") {
    if (!parse_int(value, v) || v <= 0 || v > kMaxSensorDim) return false;
    (key == "width" ? meta.width : meta.height) = static_cast<int>(v);
  } else if (key == "duration_us") {
    if (!parse_int(value, v) || v <= 0 || v > UINT32_MAX) return false;
    meta.duration_us = static_cast<std::uint32_t>(v);
  } else if (key == "label") {
    if (!parse_int(value, v) || v < 0 || v > 1'000'000) return false;
    meta.label = static_cast<int>(v);
  }
  return true;
}

// Shared post-parse validation for both formats.
EventSample finish_sample(std::vector<Event> events, const Metadata& meta) {
  EventSample sample;
  sample.duration_us = meta.duration_us;
  sample.label = meta.label;
  int max_x = -1, max_y = -1;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.t >= meta.duration_us)
      throw Error(ErrorCode::TimestampOutOfRange, "event " + std::to_string(i) + " at t=" + std::to_string(e.t));
    if (i > 0 && e.t < events[i - 1].t)
      throw Error(ErrorCode::UnsortedEvents, "event " + std::to_string(i) + " precedes its predecessor");
    if (meta.width > 0 && e.x >= meta.width)
      throw Error(ErrorCode::CoordinateOutOfRange, "x=" + std::to_string(e.x) + " >= width");
    if (meta.height > 0 && e.y >= meta.height)
      throw Error(ErrorCode::CoordinateOutOfRange, "y=" + std::to_string(e.y) + " >= height");
    max_x = std::max<int>(max_x, e.x);
    max_y = std::max<int>(max_y, e.y);
  }
  sample.sensor_width = meta.width > 0 ? meta.width : max_x + 1;
  sample.sensor_height = meta.height > 0 ? meta.height : max_y + 1;
  sample.events = std::move(events);
  return sample;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void check_window(const EventSample& sample, int size) {
  if (size <= 0 || size > sample.sensor_width || size > sample.sensor_height)
    throw Error(ErrorCode::WindowTooLarge, "window " + std::to_string(size) + " on " +
                                               std::to_string(sample.sensor_width) + "x" +
                                               std::to_string(sample.sensor_height) + " sensor");
}

}  // namespace

EventSample parse_dat(std::span<const std::uint8_t> bytes) {
  Metadata meta;
  std::size_t pos = 0;
  while (pos < bytes.size() && bytes[pos] == '%') {
    std::size_t end = pos;
    while (end < bytes.size() && bytes[end] != '\n') {
      const std::uint8_t c = bytes[end];
      if (c != '\t' && c != '\r' && (c < 0x20 || c > 0x7e))
        throw Error(ErrorCode::MalformedHeader, "non-ASCII byte at offset " + std::to_string(end));
      ++end;
    }
    if (end == bytes.size()) throw Error(ErrorCode::MalformedHeader, "unterminated header line");
    const std::string_view body(reinterpret_cast<const char*>(bytes.data()) + pos + 1, end - pos - 1);
    pos = end + 1;
    if (trim(body) == "end") break;
    if (!apply_metadata(body, meta))
      throw Error(ErrorCode::MalformedHeader, "bad header line '" + std::string(trim(body)) + "'");
  }

  const std::size_t payload = bytes.size() - pos;
  if (payload % 8 != 0)
    throw Error(ErrorCode::TruncatedRecord, std::to_string(payload) + " payload bytes is not a multiple of 8");

  std::vector<Event> events;
  events.reserve(payload / 8);
  for (; pos < bytes.size(); pos += 8) {
    const std::uint32_t w0 = get_u32(bytes.data() + pos);
    const std::uint32_t w1 = get_u32(bytes.data() + pos + 4);
    if (w1 >> 29)
      throw Error(ErrorCode::ReservedBitsSet, "record at offset " + std::to_string(pos));
    events.push_back(Event{w0, static_cast<std::uint16_t>(w1 & 0x3fff), static_cast<std::uint16_t>((w1 >> 14) & 0x3fff),
                           static_cast<std::uint8_t>((w1 >> 28) & 1)});
  }
  return finish_sample(std::move(events), meta);
}

std::vector<std::uint8_t> write_dat(const EventSample& sample) {
  std::ostringstream header;
  header << "% width " << sample.sensor_width << "\n"
         << "% height " << sample.sensor_height << "\n"
         << "% duration_us " << sample.duration_us << "\n"
         << "% label " << sample.label << "\n"
         << "% end\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  out.reserve(out.size() + sample.events.size() * 8);
  for (const Event& e : sample.events) {
    put_u32(out, e.t);
    put_u32(out, static_cast<std::uint32_t>(e.x) | static_cast<std::uint32_t>(e.y) << 14 |
                     static_cast<std::uint32_t>(e.polarity & 1) << 28);
  }
  return out;
}

EventSample parse_csv(std::string_view text) {
  Metadata meta;
  std::vector<Event> events;
  std::size_t line_no = 0;
  bool seen_row = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!apply_metadata(line.substr(1), meta)) throw Error(ErrorCode::BadRow, "bad metadata", line_no);
      continue;
    }
    if (!seen_row && line == "t_us,x,y,p") {
      seen_row = true;
      continue;
    }
    seen_row = true;

    long long fields[4];
    int n = 0;
    bool ok = true;
    while (ok) {
      const auto comma = line.find(',');
      if (n == 4 || !parse_int(trim(line.substr(0, comma)), fields[n])) {
        ok = false;
        break;
      }
      ++n;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (!ok || n != 4 || fields[0] < 0 || fields[0] > UINT32_MAX || fields[1] < 0 || fields[1] >= kMaxSensorDim ||
        fields[2] < 0 || fields[2] >= kMaxSensorDim || (fields[3] != 0 && fields[3] != 1))
      throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no), line_no);
    events.push_back(Event{static_cast<std::uint32_t>(fields[0]), static_cast<std::uint16_t>(fields[1]),
                           static_cast<std::uint16_t>(fields[2]), static_cast<std::uint8_t>(fields[3])});
  }
  return finish_sample(std::move(events), meta);
}

std::string write_csv(const EventSample& sample) {
  std::string out;
  out.reserve(64 + sample.events.size() * 20);
  out += "# width " + std::to_string(sample.sensor_width) + "\n";
  out += "# height " + std::to_string(sample.sensor_height) + "\n";
  out += "# duration_us " + std::to_string(sample.duration_us) + "\n";
  out += "# label " + std::to_string(sample.label) + "\n";
  out += "t_us,x,y,p\n";
  for (const Event& e : sample.events) {
    out += std::to_string(e.t);
    out += ',';
    out += std::to_string(e.x);
    out += ',';
    out += std::to_string(e.y);
    out += ',';
    out += static_cast<char>('0' + e.polarity);
    out += '\n';
  }
  return out;
}

EventSample read_event_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnreadableFile, path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::UnreadableFile, path.string());
  if (path.extension() == ".csv")
    return parse_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  return parse_dat(bytes);
}

void write_event_file(const std::filesystem::path& path, const EventSample& sample) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  if (path.extension() == ".csv") {
    out << write_csv(sample);
  } else {
    const auto bytes = write_dat(sample);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

AttentionWindow find_attention_window(const EventSample& sample, int size) {
  check_window(sample, size);
  const int w = sample.sensor_width;
  const int h = sample.sensor_height;
  // prefix[(y) * (w + 1) + x] = events with row < y and column < x.
  std::vector<std::int64_t> prefix(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  for (const Event& e : sample.events) prefix[static_cast<std::size_t>(e.y + 1) * (w + 1) + e.x + 1] += 1;
  for (int y = 1; y <= h; ++y)
    for (int x = 1; x <= w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * (w + 1) + x;
      prefix[i] += prefix[i - 1] + prefix[i - (w + 1)] - prefix[i - (w + 1) - 1];
    }
  auto at = [&](int y, int x) { return prefix[static_cast<std::size_t>(y) * (w + 1) + x]; };

  AttentionWindow best{0, 0, size};
  std::int64_t best_count = -1;
  for (int y0 = 0; y0 + size <= h; ++y0)
    for (int x0 = 0; x0 + size <= w; ++x0) {
      const std::int64_t count = at(y0 + size, x0 + size) - at(y0, x0 + size) - at(y0 + size, x0) + at(y0, x0);
      if (count > best_count) {
        best_count = count;
        best = {x0, y0, size};
      }
    }
  return best;
}

AttentionWindow center_window(const EventSample& sample, int size) {
  check_window(sample, size);
  return {(sample.sensor_width - size) / 2, (sample.sensor_height - size) / 2, size};
}

EventSample crop(const EventSample& sample, const AttentionWindow& window) {
  EventSample out;
  out.sensor_width = window.size;
  out.sensor_height = window.size;
  out.duration_us = sample.duration_us;
  out.label = sample.label;
  for (const Event& e : sample.events) {
    if (e.x < window.x0 || e.y < window.y0 || e.x >= window.x0 + window.size || e.y >= window.y0 + window.size)
      continue;
    out.events.push_back(Event{e.t, static_cast<std::uint16_t>(e.x - window.x0),
                               static_cast<std::uint16_t>(e.y - window.y0), e.polarity});
  }
  return out;
}

SpikeFrames bin_to_frames(const EventSample& sample, int timesteps) {
  if (timesteps < 1) throw Error(ErrorCode::InvalidArgument, "timesteps must be >= 1");
  if (sample.sensor_width != sample.sensor_height)
    throw Error(ErrorCode::ShapeMismatch, "binning expects a square (cropped) sample");
  SpikeFrames frames(timesteps, sample.sensor_width);
  const std::uint64_t duration = sample.duration_us;
  for (const Event& e : sample.events) {
    const int bin = static_cast<int>(static_cast<std::uint64_t>(e.t) * timesteps / duration);
    frames.data[frames.index(bin, e.polarity, e.y, e.x)] = 1;
  }
  return frames;
}

SpikeFrames prepare_frames(const EventSample& sample, int window, int timesteps, WindowMode mode) {
  const AttentionWindow w =
      mode == WindowMode::PerSample ? find_attention_window(sample, window) : center_window(sample, window);
  return bin_to_frames(crop(sample, w), timesteps);
}

EventSample generate_synthetic(int class_id, std::uint64_t seed, const SyntheticOptions& options) {
  if (class_id != 0 && class_id != 1) throw Error(ErrorCode::InvalidArgument, "synthetic class must be 0 or 1");
  if (options.bar_height > options.sensor_height || options.sensor_width <= 0)
    throw Error(ErrorCode::InvalidArgument, "bar does not fit the sensor");
  Rng rng(seed);
  EventSample sample;
  sample.sensor_width = options.sensor_width;
  sample.sensor_height = options.sensor_height;
  sample.duration_us = options.duration_us;
  sample.label = class_id;

  const std::uint64_t width = static_cast<std::uint64_t>(options.sensor_width);
  const std::uint64_t duration = options.duration_us;
  const int bar_events = options.sensor_width * options.bar_height;
  // +-5 % jitter on the noise count, same distribution for both classes.
  auto jittered = [&](int mean) {
    return static_cast<int>(mean * (0.95 + 0.1 * rng.uniform()));
  };

  if (class_id == 1) {
    const bool left_to_right = rng.below(2) == 0;
    const int y_top = static_cast<int>(rng.below(options.sensor_height - options.bar_height + 1));
    for (std::uint64_t c = 0; c < width; ++c) {
      // Column c is on the leading edge during [c, c + 1) * duration / width.
      const std::uint64_t t_begin = c * duration / width;
      const std::uint64_t t_end = (c + 1) * duration / width;
      const std::uint64_t x = left_to_right ? c : width - 1 - c;
      for (int y = y_top; y < y_top + options.bar_height; ++y) {
        const std::uint64_t span = std::max<std::uint64_t>(t_end - t_begin, 1);
        sample.events.push_back(Event{static_cast<std::uint32_t>(t_begin + rng.below(span)),
                                      static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), 1});
      }
    }
  }
  const int noise = jittered(class_id == 1 ? options.noise_events : options.noise_events + bar_events);
  for (int i = 0; i < noise; ++i) {
    sample.events.push_back(Event{static_cast<std::uint32_t>(rng.below(duration)),
                                  static_cast<std::uint16_t>(rng.below(width)),
                                  static_cast<std::uint16_t>(rng.below(options.sensor_height)),
                                  static_cast<std::uint8_t>(rng.below(2))});
  }
  std::stable_sort(sample.events.begin(), sample.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  return sample;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dataset_dir) {
  const auto path = dataset_dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingManifest, path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MissingManifest, path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::MissingManifest, path.string() + ": expected a JSON array");
  std::vector<ManifestEntry> entries;
  for (const auto& item : doc) {
    try {
      entries.push_back(ManifestEntry{item.at("file").get<std::string>(), item.at("label").get<int>(),
                                      item.at("split").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MissingManifest, path.string() + ": bad entry: " + e.what());
    }
  }
  return entries;
}

std::vector<EventSample> load_dataset(const std::filesystem::path& dataset_dir, std::string_view split,
                                      std::size_t workers) {
  std::vector<ManifestEntry> selected;
  for (auto& entry : read_manifest(dataset_dir))
    if (entry.split == split) selected.push_back(std::move(entry));

  std::vector<EventSample> samples(selected.size());
  parallel_for(selected.size(), workers, [&](std::size_t i) {
    const auto path = dataset_dir / selected[i].file;
    if (!std::filesystem::is_regular_file(path)) throw Error(ErrorCode::UnreadableFile, path.string());
    samples[i] = read_event_file(path);
    samples[i].label = selected[i].label;
  });
  return samples;
}

std::vector<EventSample> synthetic_split(const SyntheticDatasetSpec& spec, std::string_view split) {
  if (spec.classes != 2) throw Error(ErrorCode::InvalidArgument, "the synthetic generator has exactly 2 classes");
  const int per_class = split == "train" ? spec.train_per_class : spec.test_per_class;
  const std::uint64_t split_id = split == "train" ? 0 : 1;
  std::vector<EventSample> samples;
  samples.reserve(static_cast<std::size_t>(per_class) * spec.classes);
  for (int i = 0; i < per_class; ++i)
    for (int c = 0; c < spec.classes; ++c)
      samples.push_back(generate_synthetic(
          c, derive_seed(spec.seed, {split_id, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(i)}),
          spec.options));
  return samples;
}

void write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticDatasetSpec& spec) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
  nlohmann::json manifest = nlohmann::json::array();
  for (const char* split : {"train", "test"}) {
    std::filesystem::create_directories(dir / split, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + (dir / split).string());
    const auto samples = synthetic_split(spec, split);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "%s/%06zu_c%d.dat", split, i, samples[i].label);
      write_event_file(dir / name, samples[i]);
      manifest.push_back({{"file", name}, {"label", samples[i].label}, {"split", split}});
    }
  }
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::IoError, "cannot write manifest");
}

}  // namespace snnopt
