// Run configuration for the pipeline commands: one JSON file with full
// defaulting, strict unknown-key rejection, and a stable hash of the
// resolved values. Every command reads the same structure.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "beamloc/common.hpp"
#include "beamloc/geometry.hpp"
#include "beamloc/nn/model.hpp"
#include "beamloc/nn/train.hpp"
#include "beamloc/simulate.hpp"
#include "beamloc/spectra.hpp"

namespace beamloc {

inline const std::vector<std::string> kAllBeamformMethods{"das", "damas", "clean-psf",
                                                          "clean-sc", "fft-fista"};

struct RunConfig {
  std::string out_dir = "out";
  std::string data_dir;  // empty = <out_dir>/data
  std::uint64_t seed = 12345;
  int threads = 0;  // 0 = hardware concurrency

  // array
  int n_mics = 56;
  double radius_m = 0.75;
  std::string geometry_file;  // empty = golden-angle spiral

  ScanGrid grid;

  // signal
  double sample_rate = 51200.0;
  double duration = 1.0;
  double speed_of_sound = kSpeedOfSound;
  double p_min = 0.05;

  // dataset
  int n_train = 2400;
  int n_val = 800;
  int n_test = 1000;
  bool snap_to_grid = false;

  // stft / grayscale stack
  StftConfig stft;
  int stack_h = 64;
  int stack_w = 64;

  // preprocess command
  int preprocess_max_samples = 8;
  bool preprocess_export_pgm = true;

  // beamforming
  std::vector<std::string> bf_methods = kAllBeamformMethods;
  int block_len = 1024;
  double f_min = 2000.0;
  double f_max = 8000.0;
  bool diag_removal = false;
  int damas_iters = 500;
  double clean_gain = 0.6;
  int clean_max_iters = 100;
  double clean_stop_frac = 1e-6;
  int fista_iters = 200;
  int bf_max_samples = 0;  // 0 = whole test split
  int export_maps = 0;     // beam-map figure exports for the first N samples

  // model (input dims derive from n_mics and the stack size)
  std::vector<std::size_t> stage_layers{1, 2, 2, 2, 1};
  std::vector<std::size_t> stage_widths{8, 8, 16, 32, 64};
  std::vector<std::size_t> conv1d_channels{16, 32, 64};
  int conv1d_kernel = 7;
  int conv1d_stride = 4;
  std::vector<std::size_t> spl_hidden{64, 32, 16};
  int raw_downsample = 8;

  // training
  double alpha = 10.0;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch = 8;
  int epochs = 150;
  int train_max_samples = 0;
  int val_max_samples = 0;

  // eval
  std::vector<std::string> eval_methods;  // empty = bf_methods + acoustic-net
  int eval_max_samples = 0;
  int eval_repeats = 3;
  std::string eval_form = "fused";  // which checkpoint inference uses

  std::string resolved_data_dir() const {
    return data_dir.empty() ? out_dir + "/data" : data_dir;
  }

  MicArrayGeometry geometry() const {
    if (!geometry_file.empty()) return load_geometry(geometry_file);
    return build_spiral_array(n_mics, radius_m);
  }

  DatasetConfig dataset() const {
    DatasetConfig d;
    d.n_train = n_train;
    d.n_val = n_val;
    d.n_test = n_test;
    d.base_seed = seed;
    d.geometry = geometry();
    d.grid = grid;
    d.sample_rate = sample_rate;
    d.duration = duration;
    d.p_min = p_min;
    d.speed_of_sound = speed_of_sound;
    d.snap_to_grid = snap_to_grid;
    d.out_dir = resolved_data_dir();
    d.threads = threads;
    return d;
  }

  nn::ModelConfig model() const {
    nn::ModelConfig m;
    m.stage_layers = stage_layers;
    m.stage_widths = stage_widths;
    m.in_channels = static_cast<std::size_t>(n_mics);
    m.in_h = static_cast<std::size_t>(stack_h);
    m.in_w = static_cast<std::size_t>(stack_w);
    m.conv1d_channels = conv1d_channels;
    m.conv1d_kernel = static_cast<std::size_t>(conv1d_kernel);
    m.conv1d_stride = static_cast<std::size_t>(conv1d_stride);
    m.spl_hidden = spl_hidden;
    m.raw_downsample = static_cast<std::size_t>(raw_downsample);
    return m;
  }

  nn::TrainConfig train() const {
    nn::TrainConfig t;
    t.alpha = alpha;
    t.lr = lr;
    t.beta1 = beta1;
    t.beta2 = beta2;
    t.eps = adam_eps;
    t.batch = batch;
    t.epochs = epochs;
    t.seed = seed;
    return t;
  }

  std::vector<std::string> resolved_eval_methods() const {
    if (!eval_methods.empty()) return eval_methods;
    std::vector<std::string> all = bf_methods;
    all.push_back("acoustic-net");
    return all;
  }

  void validate() const {
    if (out_dir.empty()) throw InvalidArgument("config: out_dir must not be empty");
    if (n_mics < 1) throw InvalidArgument("config: array.n_mics must be >= 1");
    if (radius_m <= 0.0) throw InvalidArgument("config: array.radius_m must be positive");
    grid.validate();
    if (sample_rate <= 0.0 || duration <= 0.0)
      throw InvalidArgument("config: signal.sample_rate and signal.duration must be positive");
    if (p_min <= 0.0) throw InvalidArgument("config: signal.p_min must be positive");
    if (n_train < 0 || n_val < 0 || n_test < 0)
      throw InvalidArgument("config: dataset counts must be non-negative");
    stft.validate();
    if (stack_h < 1 || stack_w < 1)
      throw InvalidArgument("config: stft.out_h and stft.out_w must be positive");
    for (const auto& m : bf_methods)
      if (std::find(kAllBeamformMethods.begin(), kAllBeamformMethods.end(), m) ==
          kAllBeamformMethods.end())
        throw InvalidArgument("config: beamform.methods has unknown method '" + m + "'");
    if (block_len < 2) throw InvalidArgument("config: beamform.block_len must be >= 2");
    if (!(f_min > 0.0) || !(f_max > f_min))
      throw InvalidArgument("config: beamform band needs 0 < f_min < f_max");
    if (damas_iters < 1 || clean_max_iters < 1 || fista_iters < 1)
      throw InvalidArgument("config: beamform iteration counts must be >= 1");
    if (clean_gain <= 0.0 || clean_gain > 1.0)
      throw InvalidArgument("config: beamform.clean_gain must be in (0, 1]");
    model().validate();
    train().validate();
    for (const auto& m : resolved_eval_methods())
      if (m != "acoustic-net" &&
          std::find(kAllBeamformMethods.begin(), kAllBeamformMethods.end(), m) ==
              kAllBeamformMethods.end())
        throw InvalidArgument("config: eval.methods has unknown method '" + m + "'");
    if (eval_repeats < 1) throw InvalidArgument("config: eval.repeats must be >= 1");
    if (eval_form != "fused" && eval_form != "train")
      throw InvalidArgument("config: eval.form must be 'fused' or 'train'");
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::string& prefix,
                                const std::set<std::string>& allowed) {
  if (!j.is_object()) throw InvalidArgument("config: " + prefix + " must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw InvalidArgument("config: unknown key '" + prefix + item.key() + "'");
}

template <typename T>
void get_if(const nlohmann::json& j, const char* key, T& out, const std::string& prefix) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument("config: bad value for '" + prefix + key + "'");
  }
}

inline WindowKind window_from_name(const std::string& name) {
  if (name == "hamming") return WindowKind::kHamming;
  if (name == "hann") return WindowKind::kHann;
  if (name == "rect") return WindowKind::kRectangular;
  throw InvalidArgument("config: stft.window must be hamming, hann, or rect");
}

inline const char* window_name(WindowKind w) {
  switch (w) {
    case WindowKind::kHamming: return "hamming";
    case WindowKind::kHann: return "hann";
    default: return "rect";
  }
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
  using detail::get_if;
  using detail::reject_unknown_keys;
  RunConfig c;
  reject_unknown_keys(j, "",
                      {"out_dir", "data_dir", "seed", "threads", "array", "grid", "signal",
                       "dataset", "stft", "preprocess", "beamform", "model", "train", "eval"});
  get_if(j, "out_dir", c.out_dir, "");
  get_if(j, "data_dir", c.data_dir, "");
  get_if(j, "seed", c.seed, "");
  get_if(j, "threads", c.threads, "");

  if (j.contains("array")) {
    const auto& a = j.at("array");
    reject_unknown_keys(a, "array.", {"n_mics", "radius_m", "geometry_file"});
    get_if(a, "n_mics", c.n_mics, "array.");
    get_if(a, "radius_m", c.radius_m, "array.");
    get_if(a, "geometry_file", c.geometry_file, "array.");
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    reject_unknown_keys(g, "grid.", {"x_min", "x_max", "y_min", "y_max", "nx", "ny", "z_plane"});
    get_if(g, "x_min", c.grid.x_min, "grid.");
    get_if(g, "x_max", c.grid.x_max, "grid.");
    get_if(g, "y_min", c.grid.y_min, "grid.");
    get_if(g, "y_max", c.grid.y_max, "grid.");
    get_if(g, "nx", c.grid.nx, "grid.");
    get_if(g, "ny", c.grid.ny, "grid.");
    get_if(g, "z_plane", c.grid.z_plane, "grid.");
  }
  if (j.contains("signal")) {
    const auto& s = j.at("signal");
    reject_unknown_keys(s, "signal.", {"sample_rate", "duration", "speed_of_sound", "p_min"});
    get_if(s, "sample_rate", c.sample_rate, "signal.");
    get_if(s, "duration", c.duration, "signal.");
    get_if(s, "speed_of_sound", c.speed_of_sound, "signal.");
    get_if(s, "p_min", c.p_min, "signal.");
  }
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    reject_unknown_keys(d, "dataset.", {"n_train", "n_val", "n_test", "snap_to_grid"});
    get_if(d, "n_train", c.n_train, "dataset.");
    get_if(d, "n_val", c.n_val, "dataset.");
    get_if(d, "n_test", c.n_test, "dataset.");
    get_if(d, "snap_to_grid", c.snap_to_grid, "dataset.");
  }
  if (j.contains("stft")) {
    const auto& s = j.at("stft");
    reject_unknown_keys(s, "stft.",
                        {"window_len", "hop", "fft_len", "window", "out_h", "out_w"});
    get_if(s, "window_len", c.stft.window_len, "stft.");
    get_if(s, "hop", c.stft.hop, "stft.");
    get_if(s, "fft_len", c.stft.fft_len, "stft.");
    if (s.contains("window")) {
      std::string w;
      get_if(s, "window", w, "stft.");
      c.stft.window = detail::window_from_name(w);
    }
    get_if(s, "out_h", c.stack_h, "stft.");
    get_if(s, "out_w", c.stack_w, "stft.");
  }
  if (j.contains("preprocess")) {
    const auto& p = j.at("preprocess");
    reject_unknown_keys(p, "preprocess.", {"max_samples", "export_pgm"});
    get_if(p, "max_samples", c.preprocess_max_samples, "preprocess.");
    get_if(p, "export_pgm", c.preprocess_export_pgm, "preprocess.");
  }
  if (j.contains("beamform")) {
    const auto& b = j.at("beamform");
    reject_unknown_keys(b, "beamform.",
                        {"methods", "block_len", "f_min", "f_max", "diag_removal", "damas_iters",
                         "clean_gain", "clean_max_iters", "clean_stop_frac", "fista_iters",
                         "max_samples", "export_maps"});
    get_if(b, "methods", c.bf_methods, "beamform.");
    get_if(b, "block_len", c.block_len, "beamform.");
    get_if(b, "f_min", c.f_min, "beamform.");
    get_if(b, "f_max", c.f_max, "beamform.");
    get_if(b, "diag_removal", c.diag_removal, "beamform.");
    get_if(b, "damas_iters", c.damas_iters, "beamform.");
    get_if(b, "clean_gain", c.clean_gain, "beamform.");
    get_if(b, "clean_max_iters", c.clean_max_iters, "beamform.");
    get_if(b, "clean_stop_frac", c.clean_stop_frac, "beamform.");
    get_if(b, "fista_iters", c.fista_iters, "beamform.");
    get_if(b, "max_samples", c.bf_max_samples, "beamform.");
    get_if(b, "export_maps", c.export_maps, "beamform.");
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown_keys(m, "model.",
                        {"stage_layers", "stage_widths", "conv1d_channels", "conv1d_kernel",
                         "conv1d_stride", "spl_hidden", "raw_downsample"});
    get_if(m, "stage_layers", c.stage_layers, "model.");
    get_if(m, "stage_widths", c.stage_widths, "model.");
    get_if(m, "conv1d_channels", c.conv1d_channels, "model.");
    get_if(m, "conv1d_kernel", c.conv1d_kernel, "model.");
    get_if(m, "conv1d_stride", c.conv1d_stride, "model.");
    get_if(m, "spl_hidden", c.spl_hidden, "model.");
    get_if(m, "raw_downsample", c.raw_downsample, "model.");
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown_keys(t, "train.",
                        {"alpha", "lr", "beta1", "beta2", "eps", "batch", "epochs", "max_samples",
                         "val_max_samples"});
    get_if(t, "alpha", c.alpha, "train.");
    get_if(t, "lr", c.lr, "train.");
    get_if(t, "beta1", c.beta1, "train.");
    get_if(t, "beta2", c.beta2, "train.");
    get_if(t, "eps", c.adam_eps, "train.");
    get_if(t, "batch", c.batch, "train.");
    get_if(t, "epochs", c.epochs, "train.");
    get_if(t, "max_samples", c.train_max_samples, "train.");
    get_if(t, "val_max_samples", c.val_max_samples, "train.");
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    reject_unknown_keys(e, "eval.", {"methods", "max_samples", "repeats", "form"});
    get_if(e, "methods", c.eval_methods, "eval.");
    get_if(e, "max_samples", c.eval_max_samples, "eval.");
    get_if(e, "repeats", c.eval_repeats, "eval.");
    get_if(e, "form", c.eval_form, "eval.");
  }
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["out_dir"] = c.out_dir;
  j["data_dir"] = c.data_dir;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["array"] = {{"n_mics", c.n_mics},
                {"radius_m", c.radius_m},
                {"geometry_file", c.geometry_file}};
  j["grid"] = {{"x_min", c.grid.x_min}, {"x_max", c.grid.x_max}, {"y_min", c.grid.y_min},
               {"y_max", c.grid.y_max}, {"nx", c.grid.nx},       {"ny", c.grid.ny},
               {"z_plane", c.grid.z_plane}};
  j["signal"] = {{"sample_rate", c.sample_rate},
                 {"duration", c.duration},
                 {"speed_of_sound", c.speed_of_sound},
                 {"p_min", c.p_min}};
  j["dataset"] = {{"n_train", c.n_train},
                  {"n_val", c.n_val},
                  {"n_test", c.n_test},
                  {"snap_to_grid", c.snap_to_grid}};
  j["stft"] = {{"window_len", c.stft.window_len}, {"hop", c.stft.hop},
               {"fft_len", c.stft.fft_len},       {"window", detail::window_name(c.stft.window)},
               {"out_h", c.stack_h},              {"out_w", c.stack_w}};
  j["preprocess"] = {{"max_samples", c.preprocess_max_samples},
                     {"export_pgm", c.preprocess_export_pgm}};
  j["beamform"] = {{"methods", c.bf_methods},
                   {"block_len", c.block_len},
                   {"f_min", c.f_min},
                   {"f_max", c.f_max},
                   {"diag_removal", c.diag_removal},
                   {"damas_iters", c.damas_iters},
                   {"clean_gain", c.clean_gain},
                   {"clean_max_iters", c.clean_max_iters},
                   {"clean_stop_frac", c.clean_stop_frac},
                   {"fista_iters", c.fista_iters},
                   {"max_samples", c.bf_max_samples},
                   {"export_maps", c.export_maps}};
  j["model"] = {{"stage_layers", c.stage_layers},
                {"stage_widths", c.stage_widths},
                {"conv1d_channels", c.conv1d_channels},
                {"conv1d_kernel", c.conv1d_kernel},
                {"conv1d_stride", c.conv1d_stride},
                {"spl_hidden", c.spl_hidden},
                {"raw_downsample", c.raw_downsample}};
  j["train"] = {{"alpha", c.alpha},   {"lr", c.lr},
                {"beta1", c.beta1},   {"beta2", c.beta2},
                {"eps", c.adam_eps},  {"batch", c.batch},
                {"epochs", c.epochs}, {"max_samples", c.train_max_samples},
                {"val_max_samples", c.val_max_samples}};
  j["eval"] = {{"methods", c.eval_methods},
               {"max_samples", c.eval_max_samples},
               {"repeats", c.eval_repeats},
               {"form", c.eval_form}};
  return j;
}

// FNV-1a over the canonical (sorted-key) dump of the resolved config.
inline std::string config_hash(const RunConfig& c) {
  return hash_hex(fnv1a64(config_to_json(c).dump()));
}

// Reads and resolves a config file. Parse failures carry the line number;
// the BEAMLOC_OUT_DIR environment variable overrides out_dir.
inline RunConfig load_config(const std::string& path) {
  nlohmann::json j = nlohmann::json::object();
  if (!path.empty()) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    const std::string text = buf.str();
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      std::size_t line = 1;
      for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
      throw FormatError(path + ":" + std::to_string(line) + ": " + e.what());
    }
  }
  RunConfig c = config_from_json(j);
  if (const char* env = std::getenv("BEAMLOC_OUT_DIR"); env && *env) c.out_dir = env;
  c.validate();
  return c;
}

}  // namespace beamloc
