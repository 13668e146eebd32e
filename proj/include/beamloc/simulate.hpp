// Acoustic forward model for a point source over a planar array, white-noise
// synthesis with exact fractional delays, and labeled dataset generation.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "beamloc/common.hpp"
#include "beamloc/fft.hpp"
#include "beamloc/geometry.hpp"

namespace beamloc {

enum class Split { kTrain, kVal, kTest };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    default: return "test";
  }
}

inline Split split_from_name(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw FormatError("unknown split name: " + s);
}

// Ground truth for one simulated recording: scan-plane position and RMS
// source strength referenced to 1 m.
struct SourceSample {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double p = 1.0;
  Split split = Split::kTrain;
};

// Time-domain mic recordings, mic-major. Stored as float32 to round-trip the
// on-disk format bit-exactly.
struct MultichannelSignal {
  std::size_t n_mics = 0;
  std::size_t n_samples = 0;
  double sample_rate = 0.0;
  std::vector<float> data;  // [mic][sample]

  const float* channel(std::size_t m) const { return data.data() + m * n_samples; }
  float* channel(std::size_t m) { return data.data() + m * n_samples; }

  std::vector<double> channel_d(std::size_t m) const {
    std::vector<double> out(n_samples);
    const float* c = channel(m);
    for (std::size_t i = 0; i < n_samples; ++i) out[i] = c[i];
    return out;
  }
};

struct Propagation {
  double delay = 0.0;  // seconds
  double gain = 0.0;   // 1/r, pressure referenced to 1 m
};

// Spherical-spreading parameters from source (src.x, src.y, grid.z_plane) to
// every microphone.
inline std::vector<Propagation> propagation_params(const SourceSample& src,
                                                   const MicArrayGeometry& geom,
                                                   const ScanGrid& grid,
                                                   double speed_of_sound = kSpeedOfSound) {
  const Vec3 source{src.x, src.y, grid.z_plane};
  std::vector<Propagation> out;
  out.reserve(geom.count());
  for (const auto& mic : geom.positions) {
    const double r = distance(source, mic);
    if (r < 1e-9)
      throw DegenerateGeometry("source coincides with a microphone");
    out.push_back({r / speed_of_sound, 1.0 / r});
  }
  return out;
}

namespace detail {

// Applies gain * fractional delay (in samples) to the padded spectrum of the
// source waveform. Signed-frequency mapping keeps the result real.
inline void apply_delay_gain(const std::vector<std::complex<double>>& spectrum,
                             double delay_samples, double gain,
                             std::vector<std::complex<double>>& out) {
  const std::size_t len = spectrum.size();
  out.resize(len);
  const double w0 = 2.0 * M_PI * delay_samples / static_cast<double>(len);
  for (std::size_t k = 0; k < len; ++k) {
    double f = static_cast<double>(k);
    if (k > len / 2) f -= static_cast<double>(len);
    if (2 * k == len) {
      out[k] = spectrum[k] * (gain * std::cos(w0 * f));
    } else {
      out[k] = spectrum[k] * std::polar(gain, -w0 * f);
    }
  }
}

}  // namespace detail

// Draws one Gaussian white-noise source waveform with RMS src.p and renders
// each channel as the gain-scaled, fractionally delayed copy. Delays are
// realized in the frequency domain on a zero-padded buffer (padding covers
// the maximum delay, so nothing wraps); the recording window starts after a
// steady-state lead-in so every channel carries full signal energy.
inline MultichannelSignal synthesize_recording(const SourceSample& src,
                                               const MicArrayGeometry& geom,
                                               const ScanGrid& grid,
                                               double sample_rate, double duration,
                                               std::uint64_t seed,
                                               double speed_of_sound = kSpeedOfSound) {
  if (duration <= 0.0) throw InvalidArgument("duration must be positive");
  if (sample_rate <= 0.0) throw InvalidArgument("sample rate must be positive");
  if (src.p <= 0.0) throw InvalidArgument("source strength must be positive");

  const auto prop = propagation_params(src, geom, grid, speed_of_sound);
  const auto n = static_cast<std::size_t>(std::llround(sample_rate * duration));

  double max_delay = 0.0;
  for (const auto& pr : prop) max_delay = std::max(max_delay, pr.delay);
  const auto max_delay_samples = static_cast<std::size_t>(std::ceil(max_delay * sample_rate));
  const std::size_t lead = max_delay_samples + 256;  // margin past the edge ringing
  const std::size_t padded = fft::next_pow2(n + lead + max_delay_samples + 1);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, src.p);
  std::vector<std::complex<double>> source(padded, 0.0);
  for (std::size_t i = 0; i < n + lead; ++i) source[i] = noise(rng);

  const auto spectrum = fft::forward(source);

  MultichannelSignal sig;
  sig.n_mics = geom.count();
  sig.n_samples = n;
  sig.sample_rate = sample_rate;
  sig.data.resize(sig.n_mics * n);

  std::vector<std::complex<double>> shifted;
  for (std::size_t m = 0; m < sig.n_mics; ++m) {
    detail::apply_delay_gain(spectrum, prop[m].delay * sample_rate, prop[m].gain, shifted);
    const auto wave = fft::inverse(shifted);
    float* ch = sig.channel(m);
    for (std::size_t i = 0; i < n; ++i) ch[i] = static_cast<float>(wave[lead + i].real());
  }
  return sig;
}

// ---------------------------------------------------------------------------
// Recording file, magic "ACN1": u32 version(=1), n_mics, n_samples,
// sample_rate_hz; f64 x, y, p; float32 payload, mic-major, little-endian.
// ---------------------------------------------------------------------------

inline void save_recording(const std::string& path, const SourceSample& src,
                           const MultichannelSignal& sig) {
  auto os = io::open_out(path);
  os.write("ACN1", 4);
  io::write_u32(os, 1);
  io::write_u32(os, static_cast<std::uint32_t>(sig.n_mics));
  io::write_u32(os, static_cast<std::uint32_t>(sig.n_samples));
  io::write_u32(os, static_cast<std::uint32_t>(std::llround(sig.sample_rate)));
  io::write_f64(os, src.x);
  io::write_f64(os, src.y);
  io::write_f64(os, src.p);
  io::write_f32_array(os, sig.data.data(), sig.data.size());
  if (!os) throw IoError("failed writing recording: " + path);
}

inline std::pair<SourceSample, MultichannelSignal> load_recording(const std::string& path) {
  auto is = io::open_in(path);
  io::expect_magic(is, "ACN1", path);
  const std::uint32_t version = io::read_u32(is);
  if (version != 1) throw FormatError("unsupported recording version in " + path);
  MultichannelSignal sig;
  sig.n_mics = io::read_u32(is);
  sig.n_samples = io::read_u32(is);
  sig.sample_rate = io::read_u32(is);
  if (sig.n_mics == 0 || sig.n_samples == 0)
    throw FormatError("empty recording shape in " + path);
  SourceSample src;
  src.x = io::read_f64(is);
  src.y = io::read_f64(is);
  src.p = io::read_f64(is);
  sig.data.resize(sig.n_mics * sig.n_samples);
  io::read_f32_array(is, sig.data.data(), sig.data.size());
  char extra;
  if (is.read(&extra, 1)) throw FormatError("trailing bytes in " + path);
  return {src, sig};
}

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

struct DatasetConfig {
  int n_train = 2400;
  int n_val = 800;
  int n_test = 1000;
  std::uint64_t base_seed = 12345;
  MicArrayGeometry geometry;
  ScanGrid grid;
  double sample_rate = 51200.0;
  double duration = 1.0;
  double p_min = 0.05;  // lower RMS bound; p = 0 has no finite SPL
  double speed_of_sound = kSpeedOfSound;
  bool snap_to_grid = false;  // snap drawn positions to the nearest scan node
  std::string out_dir;
  int threads = 0;  // 0 = hardware concurrency
};

struct ManifestRecord {
  SourceSample sample;
  std::string path;  // relative to the manifest directory
};

struct DatasetManifest {
  std::uint64_t base_seed = 0;
  std::string geometry_hash;
  int n_train = 0, n_val = 0, n_test = 0;
  std::vector<ManifestRecord> records;
};

inline void save_manifest(const std::string& path, const DatasetManifest& m) {
  nlohmann::json j;
  j["base_seed"] = m.base_seed;
  j["geometry_hash"] = m.geometry_hash;
  j["counts"] = {{"train", m.n_train}, {"val", m.n_val}, {"test", m.n_test}};
  auto& recs = j["records"] = nlohmann::json::array();
  for (const auto& r : m.records) {
    recs.push_back({{"id", r.sample.id},
                    {"x", r.sample.x},
                    {"y", r.sample.y},
                    {"p", r.sample.p},
                    {"split", split_name(r.sample.split)},
                    {"path", r.path}});
  }
  auto os = io::open_out(path, false);
  os << j.dump(2) << "\n";
}

inline DatasetManifest load_manifest(const std::string& path) {
  auto is = io::open_in(path, false);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  DatasetManifest m;
  try {
    m.base_seed = j.at("base_seed").get<std::uint64_t>();
    m.geometry_hash = j.at("geometry_hash").get<std::string>();
    m.n_train = j.at("counts").at("train").get<int>();
    m.n_val = j.at("counts").at("val").get<int>();
    m.n_test = j.at("counts").at("test").get<int>();
    for (const auto& rj : j.at("records")) {
      ManifestRecord r;
      r.sample.id = rj.at("id").get<int>();
      r.sample.x = rj.at("x").get<double>();
      r.sample.y = rj.at("y").get<double>();
      r.sample.p = rj.at("p").get<double>();
      r.sample.split = split_from_name(rj.at("split").get<std::string>());
      r.path = rj.at("path").get<std::string>();
      m.records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest missing field: ") + e.what());
  }
  return m;
}

// Draws the ground truth for sample `id`. Split from the id ranges; position
// uniform over the scan extent, strength uniform in (p_min, 1]. Each sample
// owns the seed base_seed + id, so generation order cannot matter.
inline SourceSample draw_sample(const DatasetConfig& cfg, int id) {
  SourceSample s;
  s.id = id;
  if (id < cfg.n_train)
    s.split = Split::kTrain;
  else if (id < cfg.n_train + cfg.n_val)
    s.split = Split::kVal;
  else
    s.split = Split::kTest;
  std::mt19937_64 rng(cfg.base_seed + static_cast<std::uint64_t>(id));
  std::uniform_real_distribution<double> ux(cfg.grid.x_min, cfg.grid.x_max);
  std::uniform_real_distribution<double> uy(cfg.grid.y_min, cfg.grid.y_max);
  std::uniform_real_distribution<double> up(cfg.p_min, 1.0);
  s.x = ux(rng);
  s.y = uy(rng);
  if (cfg.snap_to_grid) {
    const std::size_t g = cfg.grid.nearest_node(s.x, s.y);
    s.x = cfg.grid.node_x_of(g);
    s.y = cfg.grid.node_y_of(g);
  }
  double p = up(rng);
  if (p <= cfg.p_min) p = 1.0;  // closes the interval to (p_min, 1]
  s.p = p;
  return s;
}

// The per-sample synthesis seed is offset from the draw seed stream so that
// ground-truth draws and waveforms stay independent.
inline std::uint64_t synthesis_seed(std::uint64_t base_seed, int id) {
  return base_seed + 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(id);
}

inline DatasetManifest generate_dataset(const DatasetConfig& cfg) {
  cfg.grid.validate();
  cfg.geometry.validate();
  if (cfg.n_train < 0 || cfg.n_val < 0 || cfg.n_test < 0)
    throw InvalidArgument("split counts must be non-negative");
  const int total = cfg.n_train + cfg.n_val + cfg.n_test;
  if (total == 0) throw InvalidArgument("dataset must contain at least one sample");

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);

  DatasetManifest manifest;
  manifest.base_seed = cfg.base_seed;
  manifest.geometry_hash = hash_hex(geometry_hash(cfg.geometry));
  manifest.n_train = cfg.n_train;
  manifest.n_val = cfg.n_val;
  manifest.n_test = cfg.n_test;
  manifest.records.resize(static_cast<std::size_t>(total));

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_threads =
      cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::min(hw, 8u);

  std::atomic<int> next{0};
  std::vector<std::string> errors(n_threads);
  auto worker = [&](unsigned tid) {
    try {
      for (int id = next.fetch_add(1); id < total; id = next.fetch_add(1)) {
        const SourceSample s = draw_sample(cfg, id);
        const auto sig = synthesize_recording(s, cfg.geometry, cfg.grid, cfg.sample_rate,
                                              cfg.duration, synthesis_seed(cfg.base_seed, id),
                                              cfg.speed_of_sound);
        char name[32];
        std::snprintf(name, sizeof(name), "rec_%05d.acn", id);
        save_recording((fs::path(cfg.out_dir) / name).string(), s, sig);
        manifest.records[static_cast<std::size_t>(id)] = {s, name};
      }
    } catch (const std::exception& e) {
      errors[tid] = e.what();
    }
  };

  if (n_threads <= 1 || total <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (!e.empty()) throw IoError("dataset generation failed: " + e);

  save_manifest((fs::path(cfg.out_dir) / "manifest.json").string(), manifest);
  return manifest;
}

}  // namespace beamloc
