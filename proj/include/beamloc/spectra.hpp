// STFT preprocessing: per-mic spectrograms, the joint grayscale stack the
// network consumes, and SPL conversion.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "beamloc/common.hpp"
#include "beamloc/fft.hpp"
#include "beamloc/simulate.hpp"

namespace beamloc {

enum class WindowKind { kHamming, kRectangular, kHann };

inline std::vector<double> make_window(WindowKind kind, std::size_t len) {
  std::vector<double> w(len, 1.0);
  switch (kind) {
    case WindowKind::kRectangular:
      break;
    case WindowKind::kHamming:
      for (std::size_t n = 0; n < len; ++n)
        w[n] = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / (len - 1));
      break;
    case WindowKind::kHann:
      for (std::size_t n = 0; n < len; ++n)
        w[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / (len - 1));
      break;
  }
  return w;
}

struct StftConfig {
  int window_len = 256;
  int hop = 128;
  int fft_len = 256;
  WindowKind window = WindowKind::kHamming;

  void validate() const {
    if (hop <= 0 || window_len < hop || fft_len < window_len)
      throw InvalidArgument("stft requires 0 < hop <= window_len <= fft_len");
  }

  std::size_t n_freq() const { return static_cast<std::size_t>(fft_len) / 2 + 1; }
  std::size_t n_frames(std::size_t n_samples) const {
    if (n_samples < static_cast<std::size_t>(window_len)) return 0;
    return (n_samples - static_cast<std::size_t>(window_len)) / static_cast<std::size_t>(hop) + 1;
  }
};

// One-sided STFT; frame m covers samples [m*hop, m*hop + window_len).
// Rows are frequency bins (fft_len/2 + 1), columns are frames.
inline Eigen::MatrixXcd stft(const std::vector<double>& signal, const StftConfig& cfg) {
  cfg.validate();
  if (signal.size() < static_cast<std::size_t>(cfg.window_len))
    throw InvalidArgument("signal shorter than the analysis window");
  const auto w = make_window(cfg.window, static_cast<std::size_t>(cfg.window_len));
  const std::size_t frames = cfg.n_frames(signal.size());
  const std::size_t bins = cfg.n_freq();
  Eigen::MatrixXcd out(bins, frames);
  std::vector<double> block(static_cast<std::size_t>(cfg.fft_len), 0.0);
  for (std::size_t m = 0; m < frames; ++m) {
    const std::size_t start = m * static_cast<std::size_t>(cfg.hop);
    for (int n = 0; n < cfg.window_len; ++n)
      block[static_cast<std::size_t>(n)] = signal[start + static_cast<std::size_t>(n)] * w[static_cast<std::size_t>(n)];
    std::fill(block.begin() + cfg.window_len, block.end(), 0.0);
    const auto spec = fft::real_forward_half(block);
    for (std::size_t k = 0; k < bins; ++k) out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = spec[k];
  }
  return out;
}

// Per-mic grayscale spectrograms, normalized jointly across the stack so
// inter-mic level differences survive. Values in [0, 1].
struct SpectrogramStack {
  std::size_t n_mics = 0;
  std::size_t height = 0;  // frequency
  std::size_t width = 0;   // time
  StftConfig config;
  std::vector<float> data;  // [mic][freq][frame]

  const float* mic(std::size_t m) const { return data.data() + m * height * width; }
  float* mic(std::size_t m) { return data.data() + m * height * width; }
};

inline constexpr double kLogFloor = 1e-10;  // added before the log, keeps -inf out

// log-magnitude -> center crop / average pool to (out_h, out_w) -> joint
// min-max to [0, 1]. Pooling commutes with the affine normalization, so
// normalizing last keeps the output range exact. A constant stack (all-zero
// input) maps to all zeros.
inline SpectrogramStack to_gray_stack(const MultichannelSignal& sig, const StftConfig& cfg,
                                      std::size_t out_h, std::size_t out_w) {
  if (sig.n_mics == 0) throw InvalidArgument("signal has no channels");
  if (out_h == 0 || out_w == 0) throw InvalidArgument("output dims must be positive");
  const std::size_t bins = cfg.n_freq();
  const std::size_t frames = cfg.n_frames(sig.n_samples);
  if (out_h > bins || out_w > frames)
    throw InvalidArgument("requested stack dims exceed available STFT bins");

  const std::size_t pool_h = bins / out_h;
  const std::size_t pool_w = frames / out_w;
  const std::size_t crop_h0 = (bins / pool_h - out_h) / 2 * pool_h;
  const std::size_t crop_w0 = (frames / pool_w - out_w) / 2 * pool_w;

  SpectrogramStack stack;
  stack.n_mics = sig.n_mics;
  stack.height = out_h;
  stack.width = out_w;
  stack.config = cfg;
  stack.data.assign(sig.n_mics * out_h * out_w, 0.0f);

  std::vector<double> pooled(out_h * out_w);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::vector<double> all(sig.n_mics * out_h * out_w);
  for (std::size_t m = 0; m < sig.n_mics; ++m) {
    const auto spec = stft(sig.channel_d(m), cfg);
    for (std::size_t i = 0; i < out_h; ++i) {
      for (std::size_t j = 0; j < out_w; ++j) {
        double acc = 0.0;
        for (std::size_t di = 0; di < pool_h; ++di)
          for (std::size_t dj = 0; dj < pool_w; ++dj) {
            const auto r = static_cast<Eigen::Index>(crop_h0 + i * pool_h + di);
            const auto c = static_cast<Eigen::Index>(crop_w0 + j * pool_w + dj);
            acc += 20.0 * std::log10(std::abs(spec(r, c)) + kLogFloor);
          }
        acc /= static_cast<double>(pool_h * pool_w);
        pooled[i * out_w + j] = acc;
        lo = std::min(lo, acc);
        hi = std::max(hi, acc);
      }
    }
    std::copy(pooled.begin(), pooled.end(), all.begin() + static_cast<std::ptrdiff_t>(m * out_h * out_w));
  }

  if (hi > lo) {
    const double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < all.size(); ++i)
      stack.data[i] = static_cast<float>((all[i] - lo) * inv);
  }
  // hi == lo: constant stack stays all zeros (deterministic tie-break)
  return stack;
}

inline double spl_from_pressure(double p) {
  if (p <= 0.0) throw InvalidArgument("SPL needs a positive pressure");
  return 20.0 * std::log10(p / kRefPressure);
}

inline double pressure_from_spl(double spl) { return kRefPressure * std::pow(10.0, spl / 20.0); }

// ---------------------------------------------------------------------------
// Stack cache, magic "ACS1": u32 n_mics, height, width; float32 payload.
// ---------------------------------------------------------------------------

inline void save_stack(const std::string& path, const SpectrogramStack& stack) {
  auto os = io::open_out(path);
  os.write("ACS1", 4);
  io::write_u32(os, static_cast<std::uint32_t>(stack.n_mics));
  io::write_u32(os, static_cast<std::uint32_t>(stack.height));
  io::write_u32(os, static_cast<std::uint32_t>(stack.width));
  io::write_f32_array(os, stack.data.data(), stack.data.size());
  if (!os) throw IoError("failed writing stack cache: " + path);
}

inline SpectrogramStack load_stack(const std::string& path) {
  auto is = io::open_in(path);
  io::expect_magic(is, "ACS1", path);
  SpectrogramStack stack;
  stack.n_mics = io::read_u32(is);
  stack.height = io::read_u32(is);
  stack.width = io::read_u32(is);
  if (stack.n_mics == 0 || stack.height == 0 || stack.width == 0)
    throw FormatError("empty stack shape in " + path);
  stack.data.resize(stack.n_mics * stack.height * stack.width);
  io::read_f32_array(is, stack.data.data(), stack.data.size());
  return stack;
}

// One 8-bit PGM per mic, for eyeballing the preprocessing.
inline void export_stack_pgm(const std::string& prefix, const SpectrogramStack& stack) {
  for (std::size_t m = 0; m < stack.n_mics; ++m) {
    std::vector<double> img(stack.height * stack.width);
    const float* src = stack.mic(m);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = src[i];
    char suffix[24];
    std::snprintf(suffix, sizeof(suffix), "_mic%02zu.pgm", m);
    io::write_pgm(prefix + suffix, stack.height, stack.width, img.data(), 0.0, 1.0);
  }
}

}  // namespace beamloc
