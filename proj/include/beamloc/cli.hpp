// Command-line pipeline: simulate, preprocess, beamform, train, fuse, eval,
// report. All commands share one RunConfig; flags override individual config
// paths after the file loads. Exit codes: 0 success, 1 user error (bad
// arguments, malformed config, no detectable source), 2 I/O or internal
// failure.
#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "beamloc/beamform.hpp"
#include "beamloc/config.hpp"
#include "beamloc/metrics.hpp"
#include "beamloc/nn/checkpoint.hpp"
#include "beamloc/nn/data.hpp"
#include "beamloc/nn/train.hpp"

namespace beamloc::cli {

namespace fs = std::filesystem;

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir);
}

inline std::vector<const ManifestRecord*> split_records(const DatasetManifest& manifest,
                                                        Split split, int cap) {
  std::vector<const ManifestRecord*> out;
  for (const auto& r : manifest.records)
    if (r.sample.split == split) out.push_back(&r);
  if (cap > 0 && out.size() > static_cast<std::size_t>(cap))
    out.resize(static_cast<std::size_t>(cap));
  return out;
}

inline std::vector<SourcePoint> truths_of(const std::vector<const ManifestRecord*>& records) {
  std::vector<SourcePoint> t;
  t.reserve(records.size());
  for (const auto* r : records)
    t.push_back({r->sample.x, r->sample.y, spl_from_pressure(r->sample.p)});
  return t;
}

inline DatasetManifest load_run_manifest(const RunConfig& cfg) {
  return load_manifest((fs::path(cfg.resolved_data_dir()) / "manifest.json").string());
}

// Full map plus a zoomed CSV cut around the detected peak, so the local
// neighborhood can be plotted without the full-grid dynamic range. The zoom
// window is the peak position +/- half_width on each axis, clipped to the
// grid extent. Also drops a JSON sidecar carrying truth and estimate.
inline Estimate emit_beammap_figure(const BeamMap& map, const SourcePoint& truth,
                                    const std::string& prefix, double half_width = 0.05) {
  const Estimate est = extract_estimate(map);
  save_beammap_csv(prefix + ".csv", map);
  save_beammap_pgm(prefix + ".pgm", map);

  const double x_lo = std::max(map.grid.x_min, est.x - half_width);
  const double x_hi = std::min(map.grid.x_max, est.x + half_width);
  const double y_lo = std::max(map.grid.y_min, est.y - half_width);
  const double y_hi = std::min(map.grid.y_max, est.y + half_width);
  {
    auto os = io::open_out(prefix + "_zoom.csv", false);
    os << "x,y,value\n";
    char line[96];
    for (std::size_t g = 0; g < map.values.size(); ++g) {
      const double x = map.grid.node_x_of(g);
      const double y = map.grid.node_y_of(g);
      if (x < x_lo - 1e-12 || x > x_hi + 1e-12 || y < y_lo - 1e-12 || y > y_hi + 1e-12) continue;
      std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g\n", x, y, map.values[g]);
      os << line;
    }
    if (!os) throw IoError("failed writing " + prefix + "_zoom.csv");
  }

  nlohmann::json j;
  j["method"] = map.method;
  j["band_hz"] = {map.f_min_hz, map.f_max_hz};
  j["truth"] = {{"x", truth.x}, {"y", truth.y}, {"spl_db", truth.spl}};
  j["estimate"] = {{"x", est.x}, {"y", est.y}, {"spl_db", est.spl_db}};
  j["zoom_x"] = {x_lo, x_hi};
  j["zoom_y"] = {y_lo, y_hi};
  auto js = io::open_out(prefix + ".json", false);
  js << j.dump(2) << "\n";
  if (!js) throw IoError("failed writing " + prefix + ".json");
  return est;
}

// Shared machinery for the classical methods on the test split: steering set
// for the analysis band, PSF system matrix and center kernel built once and
// reused, and a one-recording cache so repeated timing runs of the same
// sample skip the disk.
class ClassicalRunner {
 public:
  ClassicalRunner(const RunConfig& cfg, const DatasetManifest& manifest, int cap)
      : cfg_(cfg),
        data_dir_(cfg.resolved_data_dir()),
        records_(split_records(manifest, Split::kTest, cap)),
        geom_(cfg.geometry()) {
    if (records_.empty()) throw InvalidArgument("manifest has no test-split recordings");
    const auto freqs = band_bin_freqs(cfg.sample_rate, cfg.block_len, cfg.f_min, cfg.f_max);
    steer_ = steering_set(geom_, cfg.grid, freqs, cfg.speed_of_sound);
  }

  std::size_t size() const { return records_.size(); }
  const ManifestRecord& record(std::size_t i) const { return *records_.at(i); }
  std::vector<SourcePoint> truths() const { return truths_of(records_); }

  // Builds whatever `method` needs beyond steering, so estimator timing
  // never includes one-off precomputation.
  void prepare(const std::string& method) {
    const bool needs_psf = method == "damas" || method == "clean-psf" || method == "fft-fista";
    if (needs_psf && A_.size() == 0) A_ = psf_matrix(steer_);
    if (method == "fft-fista" && kernel_.empty()) kernel_ = psf_center_kernel(A_, cfg_.grid);
  }

  BeamMap map_for(const std::string& method, std::size_t i) {
    const auto& sig = signal(i);
    const auto c = csm(sig, cfg_.block_len, cfg_.f_min, cfg_.f_max, cfg_.diag_removal);
    if (method == "clean-sc")
      return clean_sc(c, steer_, cfg_.clean_gain, cfg_.clean_max_iters, cfg_.clean_stop_frac);
    BeamMap dirty = das(c, steer_);
    if (method == "das") return dirty;
    if (method == "damas") return damas(dirty, A_, cfg_.damas_iters);
    if (method == "clean-psf")
      return clean_psf(dirty, A_, cfg_.clean_gain, cfg_.clean_max_iters, cfg_.clean_stop_frac)
          .clean;
    if (method == "fft-fista") return fft_fista(dirty, kernel_, cfg_.fista_iters);
    throw InvalidArgument("unknown beamform method '" + method + "'");
  }

  SourcePoint estimate(const std::string& method, std::size_t i) {
    const Estimate e = extract_estimate(map_for(method, i));
    return {e.x, e.y, e.spl_db};
  }

  NamedEstimator estimator(const std::string& method) {
    prepare(method);
    return {method, [this, method](std::size_t i) { return estimate(method, i); }};
  }

 private:
  const MultichannelSignal& signal(std::size_t i) {
    if (cached_ != i) {
      sig_ = load_recording((fs::path(data_dir_) / records_.at(i)->path).string()).second;
      cached_ = i;
    }
    return sig_;
  }

  RunConfig cfg_;
  std::string data_dir_;
  std::vector<const ManifestRecord*> records_;
  MicArrayGeometry geom_;
  SteeringSet steer_;
  Eigen::MatrixXd A_;
  std::vector<double> kernel_;
  std::size_t cached_ = static_cast<std::size_t>(-1);
  MultichannelSignal sig_;
};

// Network inference over the test split. Input dimensions come from the
// checkpoint, not the config, so a checkpoint trained under different stack
// dims still evaluates; the recording channel count must match.
class NetRunner {
 public:
  static std::string checkpoint_path(const RunConfig& cfg) {
    const char* name =
        cfg.eval_form == "fused" ? "checkpoint_fused.acp" : "checkpoint_train.acp";
    return (fs::path(cfg.out_dir) / name).string();
  }

  NetRunner(const RunConfig& cfg, const DatasetManifest& manifest, int cap)
      : cfg_(cfg),
        data_dir_(cfg.resolved_data_dir()),
        records_(split_records(manifest, Split::kTest, cap)) {
    if (records_.empty()) throw InvalidArgument("manifest has no test-split recordings");
    const std::string path = checkpoint_path(cfg);
    const auto ckpt = nn::load_checkpoint(path);
    if (cfg.eval_form == "fused")
      fused_.emplace(nn::fused_from_checkpoint(ckpt, path));
    else
      net_.emplace(nn::model_from_checkpoint(ckpt, path));
  }

  const nn::ModelConfig& model_config() const {
    return fused_ ? fused_->config() : net_->config();
  }

  SourcePoint estimate(std::size_t i) {
    const auto& mc = model_config();
    const auto& sig = signal(i);
    if (sig.n_mics != mc.in_channels)
      throw InvalidArgument("recording channel count does not match the checkpoint");
    const auto stack = to_gray_stack(sig, cfg_.stft, mc.in_h, mc.in_w);
    const auto raw = nn::downsample_avg(sig, mc.raw_downsample);

    nn::Tensor ts({1, mc.in_channels, mc.in_h, mc.in_w});
    std::copy(stack.data.begin(), stack.data.end(), ts.ptr());
    nn::Tensor tr({1, mc.in_channels, raw.size() / mc.in_channels});
    std::copy(raw.begin(), raw.end(), tr.ptr());

    const nn::ModelOutput out =
        fused_ ? fused_->forward(ts, tr) : net_->forward(ts, tr, false);
    const nn::LocSpl e = nn::denormalize(out.loc.data[0], out.loc.data[1], out.spl.data[0]);
    return {e.x, e.y, e.spl};
  }

  NamedEstimator estimator() {
    return {"acoustic-net", [this](std::size_t i) { return estimate(i); }};
  }

 private:
  const MultichannelSignal& signal(std::size_t i) {
    if (cached_ != i) {
      sig_ = load_recording((fs::path(data_dir_) / records_.at(i)->path).string()).second;
      cached_ = i;
    }
    return sig_;
  }

  RunConfig cfg_;
  std::string data_dir_;
  std::vector<const ManifestRecord*> records_;
  std::optional<nn::AcousticNet> net_;
  std::optional<nn::FusedAcousticNet> fused_;
  std::size_t cached_ = static_cast<std::size_t>(-1);
  MultichannelSignal sig_;
};

inline void cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto manifest = generate_dataset(cfg.dataset());
  out << "simulate: wrote " << manifest.records.size() << " recordings to "
      << cfg.resolved_data_dir() << "\n";
}

inline void cmd_preprocess(const RunConfig& cfg, std::ostream& out) {
  const std::string data_dir = cfg.resolved_data_dir();
  const auto manifest = load_run_manifest(cfg);
  const auto records = split_records(manifest, Split::kTest, cfg.preprocess_max_samples);
  if (records.empty()) throw InvalidArgument("manifest has no test-split recordings");

  const std::string dir = (fs::path(cfg.out_dir) / "preprocess").string();
  ensure_dir(dir);
  auto index = io::open_out((fs::path(dir) / "index.csv").string(), false);
  index << "id,path,mean\n";
  for (const auto* rec : records) {
    const auto [src, sig] = load_recording((fs::path(data_dir) / rec->path).string());
    const auto stack = to_gray_stack(sig, cfg.stft, static_cast<std::size_t>(cfg.stack_h),
                                     static_cast<std::size_t>(cfg.stack_w));
    const std::string stem = fs::path(rec->path).stem().string();
    save_stack((fs::path(dir) / (stem + ".acs")).string(), stack);
    if (cfg.preprocess_export_pgm) export_stack_pgm((fs::path(dir) / stem).string(), stack);
    const double mean = std::accumulate(stack.data.begin(), stack.data.end(), 0.0) /
                        static_cast<double>(std::max<std::size_t>(1, stack.data.size()));
    char line[160];
    std::snprintf(line, sizeof(line), "%d,%s.acs,%.9g\n", src.id, stem.c_str(), mean);
    index << line;
  }
  if (!index) throw IoError("failed writing preprocess index");
  out << "preprocess: wrote " << records.size() << " stacks to " << dir << "\n";
}

inline void cmd_beamform(const RunConfig& cfg, std::ostream& out) {
  const auto manifest = load_run_manifest(cfg);
  ClassicalRunner runner(cfg, manifest, cfg.bf_max_samples);
  const auto truths = runner.truths();
  ensure_dir(cfg.out_dir);

  for (const auto& method : cfg.bf_methods) {
    const EstimateSet set = run_method(runner.estimator(method), truths, cfg.eval_repeats);
    const std::string path =
        (fs::path(cfg.out_dir) / ("estimates_" + method + ".csv")).string();
    save_estimates_csv(path, set);
    out << "beamform[" << method << "]: " << set.records.size() << " estimates -> " << path
        << "\n";
  }

  if (cfg.export_maps > 0) {
    const std::string maps_dir = (fs::path(cfg.out_dir) / "maps").string();
    ensure_dir(maps_dir);
    const std::size_t n_maps =
        std::min(runner.size(), static_cast<std::size_t>(cfg.export_maps));
    for (const auto& method : cfg.bf_methods) {
      runner.prepare(method);
      for (std::size_t i = 0; i < n_maps; ++i) {
        const std::string stem = fs::path(runner.record(i).path).stem().string();
        emit_beammap_figure(runner.map_for(method, i), truths[i],
                            (fs::path(maps_dir) / (method + "_" + stem)).string());
      }
    }
    out << "beamform: exported " << n_maps << " beam maps per method to " << maps_dir << "\n";
  }
}

inline void cmd_train(const RunConfig& cfg, std::ostream& out) {
  const std::string data_dir = cfg.resolved_data_dir();
  const auto manifest = load_run_manifest(cfg);
  const auto train_set = nn::load_training_set(
      data_dir, manifest, Split::kTrain, cfg.stft, static_cast<std::size_t>(cfg.stack_h),
      static_cast<std::size_t>(cfg.stack_w), static_cast<std::size_t>(cfg.raw_downsample),
      cfg.threads, static_cast<std::size_t>(cfg.train_max_samples));
  const auto val_set = nn::load_training_set(
      data_dir, manifest, Split::kVal, cfg.stft, static_cast<std::size_t>(cfg.stack_h),
      static_cast<std::size_t>(cfg.stack_w), static_cast<std::size_t>(cfg.raw_downsample),
      cfg.threads, static_cast<std::size_t>(cfg.val_max_samples));
  out << "train: " << train_set.size() << " training / " << val_set.size()
      << " validation samples\n";

  ensure_dir(cfg.out_dir);
  nn::AcousticNet model(cfg.model());
  nn::TrainConfig t = cfg.train();
  t.checkpoint_path = (fs::path(cfg.out_dir) / "checkpoint_train.acp").string();
  t.history_path = (fs::path(cfg.out_dir) / "history.csv").string();
  t.verbose = true;
  const auto result = nn::train_model(model, train_set, val_set, t);
  out << "train: best epoch " << result.best_epoch << ", val mde " << result.best_val_mde
      << " m, checkpoint " << t.checkpoint_path << "\n";
}

inline void cmd_fuse(const RunConfig& cfg, std::ostream& out) {
  const std::string in_path = (fs::path(cfg.out_dir) / "checkpoint_train.acp").string();
  const auto ckpt = nn::load_checkpoint(in_path);
  nn::AcousticNet model = nn::model_from_checkpoint(ckpt, in_path);
  nn::FusedAcousticNet fused = nn::fuse_model(model);
  const std::string out_path = (fs::path(cfg.out_dir) / "checkpoint_fused.acp").string();
  nn::save_fused_checkpoint(out_path, fused, ckpt.epoch, ckpt.metrics);
  out << "fuse: " << in_path << " -> " << out_path << "\n";
}

inline void cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const auto manifest = load_run_manifest(cfg);
  const auto records = split_records(manifest, Split::kTest, cfg.eval_max_samples);
  if (records.empty()) throw InvalidArgument("manifest has no test-split recordings");
  const auto truths = truths_of(records);

  std::optional<ClassicalRunner> classical;
  std::optional<NetRunner> net;
  std::vector<NamedEstimator> estimators;
  for (const auto& method : cfg.resolved_eval_methods()) {
    if (method == "acoustic-net") {
      if (!net) net.emplace(cfg, manifest, cfg.eval_max_samples);
      estimators.push_back(net->estimator());
    } else {
      if (!classical) classical.emplace(cfg, manifest, cfg.eval_max_samples);
      estimators.push_back(classical->estimator(method));
    }
  }

  const ComparisonResult result = compare(estimators, truths, cfg.eval_repeats);
  ensure_dir(cfg.out_dir);
  for (const auto& set : result.estimates)
    save_estimates_csv((fs::path(cfg.out_dir) / ("estimates_" + set.method + ".csv")).string(),
                       set);
  const std::string metrics_path = (fs::path(cfg.out_dir) / "metrics.csv").string();
  save_metrics_csv(metrics_path, result.reports);
  out << format_metrics_table(result.reports);
  out << "eval: wrote " << metrics_path << "\n";
}

inline std::vector<MetricsReport> load_metrics_csv(const std::string& path) {
  auto is = io::open_in(path, false);
  std::string line;
  if (!std::getline(is, line) ||
      line != "method,mde_m,mae_spl_db,mape_x_pct,mape_spl_pct,time_s,n_failed")
    throw FormatError(path + ": unexpected metrics header");
  std::vector<MetricsReport> reports;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field[7];
    for (auto& f : field)
      if (!std::getline(ss, f, ','))
        throw FormatError(path + ": short metrics row '" + line + "'");
    MetricsReport r;
    r.method = field[0];
    try {
      r.mde_m = std::stod(field[1]);
      r.mae_spl_db = std::stod(field[2]);
      r.mape_x_pct = std::stod(field[3]);
      r.mape_spl_pct = std::stod(field[4]);
      r.time_s = std::stod(field[5]);
      r.n_failed = std::stoi(field[6]);
    } catch (const std::exception&) {
      throw FormatError(path + ": bad metrics row '" + line + "'");
    }
    reports.push_back(r);
  }
  return reports;
}

inline void cmd_report(const RunConfig& cfg, std::ostream& out) {
  const std::string metrics_path = (fs::path(cfg.out_dir) / "metrics.csv").string();
  if (!fs::exists(metrics_path))
    throw InvalidArgument("no metrics at " + metrics_path + "; run eval first");
  const auto reports = load_metrics_csv(metrics_path);
  const std::string table = format_metrics_table(reports);

  const std::string report_path = (fs::path(cfg.out_dir) / "report.txt").string();
  auto os = io::open_out(report_path, false);
  os << "# config_hash=" << config_hash(cfg) << "\n" << table;
  if (!os) throw IoError("failed writing " + report_path);
  out << table;
  out << "report: wrote " << report_path << "\n";
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"acoustic camera pipeline: simulation, beamforming, network, evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir, data_dir, eval_form, bf_method;
  std::uint64_t seed = 0;
  int threads = 0, n_train = 0, n_val = 0, n_test = 0, n_mics = 0;
  int max_samples = 0, export_maps = 0, epochs = 0, batch = 0, repeats = 0;
  double duration = 0.0, lr = 0.0, alpha = 0.0;
  bool snap = false;
  std::vector<std::string> eval_methods;

  app.add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
  app.add_option("--out-dir", out_dir, "overrides out_dir");
  app.add_option("--data-dir", data_dir, "overrides data_dir");
  app.add_option("--seed", seed, "overrides seed");
  app.add_option("--threads", threads, "overrides threads");

  CLI::App* c_sim = app.add_subcommand("simulate", "synthesize the recording dataset");
  c_sim->add_option("--n-train", n_train, "overrides dataset.n_train");
  c_sim->add_option("--n-val", n_val, "overrides dataset.n_val");
  c_sim->add_option("--n-test", n_test, "overrides dataset.n_test");
  c_sim->add_option("--n-mics", n_mics, "overrides array.n_mics");
  c_sim->add_option("--duration", duration, "overrides signal.duration");
  c_sim->add_flag("--snap-to-grid", snap, "sets dataset.snap_to_grid");

  CLI::App* c_pre = app.add_subcommand("preprocess", "export grayscale spectrogram stacks");
  c_pre->add_option("--max-samples", max_samples, "overrides preprocess.max_samples");

  CLI::App* c_bf = app.add_subcommand("beamform", "run classical methods on the test split");
  c_bf->add_option("--method", bf_method, "restricts beamform.methods to one method");
  c_bf->add_option("--max-samples", max_samples, "overrides beamform.max_samples");
  c_bf->add_option("--export-maps", export_maps, "overrides beamform.export_maps");

  CLI::App* c_train = app.add_subcommand("train", "train the localization network");
  c_train->add_option("--epochs", epochs, "overrides train.epochs");
  c_train->add_option("--batch", batch, "overrides train.batch");
  c_train->add_option("--lr", lr, "overrides train.lr");
  c_train->add_option("--alpha", alpha, "overrides train.alpha");
  c_train->add_option("--max-samples", max_samples, "overrides train.max_samples");

  CLI::App* c_fuse = app.add_subcommand("fuse", "fold the trained branches into single kernels");

  CLI::App* c_eval = app.add_subcommand("eval", "compare methods on the test split");
  c_eval->add_option("--methods", eval_methods, "overrides eval.methods")->delimiter(',');
  c_eval->add_option("--max-samples", max_samples, "overrides eval.max_samples");
  c_eval->add_option("--repeats", repeats, "overrides eval.repeats");
  c_eval->add_option("--form", eval_form, "overrides eval.form (train|fused)");

  CLI::App* c_rep = app.add_subcommand("report", "render the metrics table to report.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    const auto extras = app.remaining(true);
    if (!extras.empty())
      err << "error: unknown command or argument '" << extras.front() << "'\n\n" << app.help();
    else
      err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (app.count("--out-dir")) cfg.out_dir = out_dir;
    if (app.count("--data-dir")) cfg.data_dir = data_dir;
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--threads")) cfg.threads = threads;

    if (c_sim->count("--n-train")) cfg.n_train = n_train;
    if (c_sim->count("--n-val")) cfg.n_val = n_val;
    if (c_sim->count("--n-test")) cfg.n_test = n_test;
    if (c_sim->count("--n-mics")) cfg.n_mics = n_mics;
    if (c_sim->count("--duration")) cfg.duration = duration;
    if (c_sim->count("--snap-to-grid")) cfg.snap_to_grid = true;

    if (c_pre->count("--max-samples")) cfg.preprocess_max_samples = max_samples;

    if (c_bf->count("--method")) cfg.bf_methods = {bf_method};
    if (c_bf->count("--max-samples")) cfg.bf_max_samples = max_samples;
    if (c_bf->count("--export-maps")) cfg.export_maps = export_maps;

    if (c_train->count("--epochs")) cfg.epochs = epochs;
    if (c_train->count("--batch")) cfg.batch = batch;
    if (c_train->count("--lr")) cfg.lr = lr;
    if (c_train->count("--alpha")) cfg.alpha = alpha;
    if (c_train->count("--max-samples")) cfg.train_max_samples = max_samples;

    if (c_eval->count("--methods")) cfg.eval_methods = eval_methods;
    if (c_eval->count("--max-samples")) cfg.eval_max_samples = max_samples;
    if (c_eval->count("--repeats")) cfg.eval_repeats = repeats;
    if (c_eval->count("--form")) cfg.eval_form = eval_form;

    cfg.validate();

    if (c_sim->parsed()) cmd_simulate(cfg, out);
    if (c_pre->parsed()) cmd_preprocess(cfg, out);
    if (c_bf->parsed()) cmd_beamform(cfg, out);
    if (c_train->parsed()) cmd_train(cfg, out);
    if (c_fuse->parsed()) cmd_fuse(cfg, out);
    if (c_eval->parsed()) cmd_eval(cfg, out);
    if (c_rep->parsed()) cmd_report(cfg, out);
    return 0;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace beamloc::cli
