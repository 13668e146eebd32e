#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "beamloc/simulate.hpp"
#include "beamloc/spectra.hpp"
#include "test_helpers.hpp"

using namespace beamloc;

TEST_CASE("window shapes") {
  SECTION("hamming endpoints and symmetry") {
    const auto w = make_window(WindowKind::kHamming, 8);
    REQUIRE(w.size() == 8);
    CHECK(w[0] == Catch::Approx(0.08).margin(1e-12));
    for (std::size_t i = 0; i < 8; ++i) CHECK(w[i] == Catch::Approx(w[7 - i]).margin(1e-12));
  }
  SECTION("hann endpoints") {
    const auto w = make_window(WindowKind::kHann, 8);
    CHECK(w[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(w[7] == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("rectangular is all ones") {
    const auto w = make_window(WindowKind::kRectangular, 5);
    for (double v : w) CHECK(v == 1.0);
  }
}

TEST_CASE("stft dimensions for the default analysis settings") {
  StftConfig cfg;
  std::vector<double> x(51200, 0.0);
  x[0] = 1.0;
  const auto spec = stft(x, cfg);
  CHECK(spec.rows() == 129);
  CHECK(spec.cols() == 399);
}

TEST_CASE("stft frames match a direct DFT of the windowed slice") {
  StftConfig cfg;
  cfg.window_len = 16;
  cfg.hop = 8;
  cfg.fft_len = 16;
  cfg.window = WindowKind::kHamming;

  std::mt19937_64 rng(31415);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> x(64);
  for (auto& v : x) v = dist(rng);

  const auto spec = stft(x, cfg);
  const auto win = make_window(cfg.window, cfg.window_len);
  REQUIRE(spec.rows() == 9);
  REQUIRE(spec.cols() == 7);
  for (int m = 0; m < spec.cols(); ++m) {
    std::vector<double> frame(static_cast<std::size_t>(cfg.fft_len), 0.0);
    for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.window_len); ++i)
      frame[i] = x[static_cast<std::size_t>(m * cfg.hop) + i] * win[i];
    const auto ref = testutil::dft(frame, static_cast<std::size_t>(cfg.fft_len));
    for (int k = 0; k < spec.rows(); ++k)
      CHECK(std::abs(spec(k, m) - ref[static_cast<std::size_t>(k)]) < 1e-9);
  }
}

TEST_CASE("a pure tone concentrates in its bin") {
  StftConfig cfg;
  const double fs = 51200.0;
  const double f0 = 8000.0;  // bin 40 at fft_len 256
  std::vector<double> x(51200);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::sin(2.0 * M_PI * f0 * static_cast<double>(i) / fs);
  const auto spec = stft(x, cfg);
  Eigen::VectorXd mean_mag = spec.cwiseAbs().rowwise().mean();
  int peak = 0;
  mean_mag.maxCoeff(&peak);
  CHECK(peak == 40);
  CHECK(mean_mag(40) > 100.0 * mean_mag(80));
}

TEST_CASE("stft rejects inconsistent analysis settings") {
  StftConfig cfg;
  cfg.window_len = 256;
  cfg.fft_len = 128;
  std::vector<double> x(1024, 0.0);
  CHECK_THROWS_AS(stft(x, cfg), InvalidArgument);
  cfg = StftConfig{};
  cfg.hop = 0;
  CHECK_THROWS_AS(stft(x, cfg), InvalidArgument);
  cfg = StftConfig{};
  CHECK_THROWS_AS(stft(std::vector<double>(100, 0.0), cfg), InvalidArgument);
}

TEST_CASE("gray stack covers [0,1] jointly across channels") {
  const auto geom = build_spiral_array(3, 0.75);
  SourceSample src;
  src.x = 0.4;
  src.y = -0.2;
  src.p = 0.7;
  ScanGrid grid;
  const auto sig = synthesize_recording(src, geom, grid, 51200.0, 1.0, 17);
  StftConfig cfg;
  const auto stack = to_gray_stack(sig, cfg, 128, 128);
  REQUIRE(stack.n_mics == 3);
  REQUIRE(stack.height == 128);
  REQUIRE(stack.width == 128);
  REQUIRE(stack.data.size() == 3u * 128u * 128u);
  const auto [mn, mx] = std::minmax_element(stack.data.begin(), stack.data.end());
  CHECK(*mn == Catch::Approx(0.0).margin(1e-6));
  CHECK(*mx == Catch::Approx(1.0).margin(1e-6));
  for (float v : stack.data) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("gray stack normalization is joint, not per channel") {
  // channel 1 is a scaled copy of channel 0, so after the shared log/min-max
  // map its maximum must stay strictly below 1
  MultichannelSignal sig;
  sig.n_mics = 2;
  sig.n_samples = 2048;
  sig.sample_rate = 51200.0;
  sig.data.resize(2 * 2048);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (std::size_t i = 0; i < 2048; ++i) {
    const double v = dist(rng);
    sig.data[i] = static_cast<float>(v);
    sig.data[2048 + i] = static_cast<float>(0.01 * v);
  }
  StftConfig cfg;
  const auto stack = to_gray_stack(sig, cfg, 8, 8);
  const float* c0 = &stack.data[0];
  const float* c1 = &stack.data[64];
  const float max0 = *std::max_element(c0, c0 + 64);
  const float max1 = *std::max_element(c1, c1 + 64);
  CHECK(max0 == Catch::Approx(1.0).margin(1e-6));
  CHECK(max1 < 0.95f);
}

TEST_CASE("constant signal maps to an all-zero stack") {
  MultichannelSignal sig;
  sig.n_mics = 1;
  sig.n_samples = 1024;
  sig.sample_rate = 51200.0;
  sig.data.assign(1024, 0.0f);
  StftConfig cfg;
  const auto stack = to_gray_stack(sig, cfg, 4, 4);
  for (float v : stack.data) CHECK(v == 0.0f);
}

TEST_CASE("desk-scale stack pools a 0.1 s recording down to 64x64") {
  const auto geom = build_spiral_array(2, 0.75);
  SourceSample src;
  src.p = 0.5;
  ScanGrid grid;
  const auto sig = synthesize_recording(src, geom, grid, 51200.0, 0.1, 4);
  StftConfig cfg;
  cfg.hop = 64;
  // 129 bins x 77 frames available
  const auto stack = to_gray_stack(sig, cfg, 64, 64);
  CHECK(stack.height == 64);
  CHECK(stack.width == 64);
}

TEST_CASE("gray stack rejects output sizes beyond the frame count") {
  MultichannelSignal sig;
  sig.n_mics = 1;
  sig.n_samples = 1024;  // 7 frames at the default hop
  sig.sample_rate = 51200.0;
  sig.data.assign(1024, 0.1f);
  StftConfig cfg;
  CHECK_THROWS_AS(to_gray_stack(sig, cfg, 128, 128), InvalidArgument);
}

TEST_CASE("sound pressure level conversions") {
  CHECK(spl_from_pressure(2e-5) == Catch::Approx(0.0).margin(1e-12));
  CHECK(spl_from_pressure(0.2) == Catch::Approx(80.0).epsilon(1e-12));
  CHECK(spl_from_pressure(1.0) == Catch::Approx(93.9794).epsilon(1e-5));
  CHECK(pressure_from_spl(80.0) == Catch::Approx(0.2).epsilon(1e-12));
  for (double p : {1e-4, 0.03, 0.5, 1.0})
    CHECK(pressure_from_spl(spl_from_pressure(p)) == Catch::Approx(p).epsilon(1e-12));
  CHECK_THROWS_AS(spl_from_pressure(0.0), InvalidArgument);
  CHECK_THROWS_AS(spl_from_pressure(-0.1), InvalidArgument);
}

TEST_CASE("stack cache round-trips bit-exactly") {
  testutil::TempDir tmp("stack");
  SpectrogramStack stack;
  stack.n_mics = 2;
  stack.height = 3;
  stack.width = 4;
  stack.data.resize(24);
  for (std::size_t i = 0; i < stack.data.size(); ++i)
    stack.data[i] = static_cast<float>(i) * 0.125f;
  save_stack(tmp.file("s.acs"), stack);
  const auto loaded = load_stack(tmp.file("s.acs"));
  CHECK(loaded.n_mics == 2);
  CHECK(loaded.height == 3);
  CHECK(loaded.width == 4);
  CHECK(loaded.data == stack.data);

  std::ofstream out(tmp.file("bad.acs"), std::ios::binary);
  out.write("NOPE", 4);
  out.close();
  CHECK_THROWS_AS(load_stack(tmp.file("bad.acs")), FormatError);
}

TEST_CASE("stack image export writes one image per channel") {
  testutil::TempDir tmp("pgm");
  SpectrogramStack stack;
  stack.n_mics = 2;
  stack.height = 2;
  stack.width = 2;
  stack.data = {0.0f, 0.25f, 0.5f, 1.0f, 1.0f, 0.5f, 0.25f, 0.0f};
  export_stack_pgm(tmp.path() + "/stack", stack);
  CHECK(std::filesystem::exists(tmp.file("stack_mic00.pgm")));
  CHECK(std::filesystem::exists(tmp.file("stack_mic01.pgm")));
  std::ifstream in(tmp.file("stack_mic00.pgm"), std::ios::binary);
  std::string header;
  in >> header;
  CHECK(header == "P5");
}
