// Dataset adapter: turns recordings into the pair of network inputs (joint
// grayscale spectrogram stack, average-downsampled raw waveforms) plus
// physical-unit targets.
#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "beamloc/common.hpp"
#include "beamloc/nn/model.hpp"
#include "beamloc/nn/tensor.hpp"
#include "beamloc/simulate.hpp"
#include "beamloc/spectra.hpp"

namespace beamloc::nn {

struct TrainingSample {
  LocSpl target;
  std::vector<float> stack;  // n_mics * h * w
  std::vector<float> raw;    // n_mics * raw_len
};

struct TrainingSet {
  std::size_t n_mics = 0, height = 0, width = 0, raw_len = 0;
  std::vector<TrainingSample> samples;

  std::size_t size() const { return samples.size(); }
};

inline std::vector<float> downsample_avg(const MultichannelSignal& sig, std::size_t factor) {
  if (factor == 0) throw InvalidArgument("downsample factor must be positive");
  const std::size_t out_len = sig.n_samples / factor;
  if (out_len == 0) throw InvalidArgument("signal shorter than the downsample factor");
  std::vector<float> out(sig.n_mics * out_len);
  for (std::size_t m = 0; m < sig.n_mics; ++m) {
    const float* ch = sig.channel(m);
    for (std::size_t i = 0; i < out_len; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < factor; ++j) acc += ch[i * factor + j];
      out[m * out_len + i] = static_cast<float>(acc / static_cast<double>(factor));
    }
  }
  return out;
}

inline TrainingSample make_training_sample(const SourceSample& src, const MultichannelSignal& sig,
                                           const StftConfig& stft_cfg, std::size_t out_h,
                                           std::size_t out_w, std::size_t downsample) {
  TrainingSample s;
  s.target = {src.x, src.y, spl_from_pressure(src.p)};
  const SpectrogramStack stack = to_gray_stack(sig, stft_cfg, out_h, out_w);
  s.stack = stack.data;
  s.raw = downsample_avg(sig, downsample);
  return s;
}

// Loads one split of the manifest; set max_samples to cap it (0 = all).
inline TrainingSet load_training_set(const std::string& data_dir, const DatasetManifest& manifest,
                                     Split split, const StftConfig& stft_cfg, std::size_t out_h,
                                     std::size_t out_w, std::size_t downsample, int threads = 0,
                                     std::size_t max_samples = 0) {
  namespace fs = std::filesystem;
  std::vector<const ManifestRecord*> records;
  for (const auto& rec : manifest.records)
    if (rec.sample.split == split) records.push_back(&rec);
  if (max_samples > 0 && records.size() > max_samples) records.resize(max_samples);

  TrainingSet set;
  set.samples.resize(records.size());
  if (records.empty()) return set;

  unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::min(std::thread::hardware_concurrency(), 8u);
  if (n_threads == 0) n_threads = 1;

  std::atomic<std::size_t> next{0};
  std::vector<std::string> errors(n_threads);
  auto worker = [&](unsigned tid) {
    try {
      for (std::size_t i = next.fetch_add(1); i < records.size(); i = next.fetch_add(1)) {
        const auto [src, sig] = load_recording((fs::path(data_dir) / records[i]->path).string());
        set.samples[i] = make_training_sample(src, sig, stft_cfg, out_h, out_w, downsample);
      }
    } catch (const std::exception& e) {
      errors[tid] = e.what();
    }
  };
  if (n_threads <= 1 || records.size() <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (!e.empty()) throw IoError("loading training set failed: " + e);

  set.height = out_h;
  set.width = out_w;
  set.n_mics = set.samples[0].stack.size() / (out_h * out_w);
  set.raw_len = set.samples[0].raw.size() / set.n_mics;
  for (const auto& s : set.samples)
    if (s.stack.size() != set.n_mics * out_h * out_w || s.raw.size() != set.n_mics * set.raw_len)
      throw InvalidArgument("training set mixes recordings of different shapes");
  return set;
}

// Copies the listed samples into batch tensors.
inline void fill_batch(const TrainingSet& set, const std::vector<std::size_t>& ids, Tensor& stack,
                       Tensor& raw, std::vector<LocSpl>& targets) {
  const std::size_t n = ids.size();
  stack = Tensor({n, set.n_mics, set.height, set.width});
  raw = Tensor({n, set.n_mics, set.raw_len});
  targets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = set.samples.at(ids[i]);
    if (s.stack.size() != set.n_mics * set.height * set.width ||
        s.raw.size() != set.n_mics * set.raw_len)
      throw InvalidArgument("training sample dims inconsistent with the set");
    std::copy(s.stack.begin(), s.stack.end(), stack.ptr() + i * s.stack.size());
    std::copy(s.raw.begin(), s.raw.end(), raw.ptr() + i * s.raw.size());
    targets[i] = s.target;
  }
}

}  // namespace beamloc::nn
