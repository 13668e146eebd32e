#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "beamloc/nn/model.hpp"
#include "beamloc/nn/repvgg.hpp"

using namespace beamloc;
using namespace beamloc::nn;

namespace {

std::mt19937_64 g_rng(1234);

void randomize_block(RepVggBlock& blk, std::mt19937_64& rng) {
  std::normal_distribution<double> w(0.0, 0.5);
  std::uniform_real_distribution<double> gamma(0.5, 1.5);
  std::normal_distribution<double> beta(0.0, 0.3);
  std::normal_distribution<double> mean(0.0, 0.5);
  std::uniform_real_distribution<double> var(0.25, 4.0);
  for (auto& v : blk.conv3.weight) v = w(rng);
  for (auto& v : blk.conv1.weight) v = w(rng);
  auto fill_bn = [&](BatchNorm& bn) {
    for (auto& v : bn.gamma) v = gamma(rng);
    for (auto& v : bn.beta) v = beta(rng);
    for (auto& v : bn.running_mean) v = mean(rng);
    for (auto& v : bn.running_var) v = var(rng);
  };
  fill_bn(blk.bn3);
  fill_bn(blk.bn1);
  if (blk.bnid) fill_bn(*blk.bnid);
}

std::vector<double> random_input(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(rng);
  return x;
}

template <typename T>
double max_rel_diff(const std::vector<T>& a, const std::vector<T>& b) {
  double peak = 1e-12, diff = 0.0;
  for (const T& v : a) peak = std::max(peak, std::abs(static_cast<double>(v)));
  for (std::size_t i = 0; i < a.size(); ++i)
    diff = std::max(diff, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return diff / peak;
}

}  // namespace

TEST_CASE("block forward equals the explicitly summed branches") {
  RepVggBlock blk(3, 3, 1, "b");
  randomize_block(blk, g_rng);
  Tensor x({2, 3, 6, 6});
  for (auto& v : x.data) v = std::normal_distribution<double>(0.0, 1.0)(g_rng);

  // independent copies of each branch, evaluated with the running statistics
  Conv2d c3(3, 3, 3, 1, 1, false, "c3");
  c3.weight = blk.conv3.weight;
  BatchNorm b3(3, "b3");
  b3.gamma = blk.bn3.gamma;
  b3.beta = blk.bn3.beta;
  b3.running_mean = blk.bn3.running_mean;
  b3.running_var = blk.bn3.running_var;
  Conv2d c1(3, 3, 1, 1, 0, false, "c1");
  c1.weight = blk.conv1.weight;
  BatchNorm b1(3, "b1");
  b1.gamma = blk.bn1.gamma;
  b1.beta = blk.bn1.beta;
  b1.running_mean = blk.bn1.running_mean;
  b1.running_var = blk.bn1.running_var;
  BatchNorm bi(3, "bi");
  bi.gamma = blk.bnid->gamma;
  bi.beta = blk.bnid->beta;
  bi.running_mean = blk.bnid->running_mean;
  bi.running_var = blk.bnid->running_var;

  const Tensor y3 = b3.forward(c3.forward(x), false);
  const Tensor y1 = b1.forward(c1.forward(x), false);
  const Tensor yi = bi.forward(x, false);
  const Tensor y = blk.forward(x, false);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double ref = std::max(0.0, y3.data[i] + y1.data[i] + yi.data[i]);
    CHECK(y.data[i] == Catch::Approx(ref).margin(1e-12));
  }
}

TEST_CASE("block output is zero when every pre-activation is negative") {
  RepVggBlock blk(2, 4, 2, "b");
  std::fill(blk.bn3.beta.begin(), blk.bn3.beta.end(), -1.0);
  std::fill(blk.bn1.beta.begin(), blk.bn1.beta.end(), -1.0);
  Tensor x({1, 2, 4, 4});
  const Tensor y = blk.forward(x, false);
  for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("identity-only block fuses to a center-one delta kernel") {
  RepVggBlock blk(2, 2, 1, "b", 0.0);
  const FusedConv f = fuse_block(blk);
  REQUIRE(f.weight.size() == 2 * 2 * 9);
  for (std::size_t o = 0; o < 2; ++o)
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t k = 0; k < 9; ++k) {
        const double expected = (o == c && k == 4) ? 1.0 : 0.0;
        CHECK(f.weight[(o * 2 + c) * 9 + k] == Catch::Approx(expected).margin(1e-12));
      }
  for (double b : f.bias) CHECK(b == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("batch-norm fold with gamma 2, var 3, eps 1 leaves the kernel unchanged") {
  RepVggBlock blk(2, 3, 2, "b", 1.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : blk.conv3.weight) v = dist(rng);
  std::fill(blk.bn3.gamma.begin(), blk.bn3.gamma.end(), 2.0);
  std::fill(blk.bn3.running_var.begin(), blk.bn3.running_var.end(), 3.0);
  std::fill(blk.bn1.gamma.begin(), blk.bn1.gamma.end(), 0.0);
  const FusedConv f = fuse_block(blk);
  for (std::size_t i = 0; i < f.weight.size(); ++i)
    CHECK(f.weight[i] == Catch::Approx(blk.conv3.weight[i]).margin(1e-12));
  for (double b : f.bias) CHECK(b == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("fold shifts the bias by beta minus scaled running mean") {
  RepVggBlock blk(2, 2, 2, "b", 0.0);
  blk.bn3.gamma = {3.0, 1.0};
  blk.bn3.beta = {0.5, -0.25};
  blk.bn3.running_mean = {2.0, -1.0};
  blk.bn3.running_var = {4.0, 1.0};
  std::fill(blk.bn1.gamma.begin(), blk.bn1.gamma.end(), 0.0);
  const FusedConv f = fuse_block(blk);
  CHECK(f.bias[0] == Catch::Approx(0.5 - 1.5 * 2.0).margin(1e-12));
  CHECK(f.bias[1] == Catch::Approx(-0.25 + 1.0).margin(1e-12));
}

TEST_CASE("fused and multi-branch inference agree on 100 random blocks") {
  std::mt19937_64 rng(20260814);
  const std::size_t channels[] = {3, 4, 8};
  double worst_single = 0.0, worst_double = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t ic = channels[rng() % 3];
    const std::size_t oc = channels[rng() % 3];
    const std::size_t stride = 1 + (rng() % 2);
    const std::size_t h = 5 + (rng() % 4), w = 5 + (rng() % 4);
    RepVggBlock blk(ic, oc, stride, "b");
    randomize_block(blk, rng);
    const FusedConv f = fuse_block(blk);
    const std::vector<double> x = random_input(ic * h * w, rng);

    const auto multi_d = block_infer_multibranch<double>(blk, x, h, w);
    const auto fused_d = block_infer_fused<double>(f, x, h, w);
    worst_double = std::max(worst_double, max_rel_diff(multi_d, fused_d));

    const std::vector<float> xf(x.begin(), x.end());
    const auto multi_s = block_infer_multibranch<float>(blk, xf, h, w);
    const auto fused_s = block_infer_fused<float>(f, xf, h, w);
    worst_single = std::max(worst_single, max_rel_diff(multi_s, fused_s));
  }
  INFO("worst relative difference: single " << worst_single << " double " << worst_double);
  CHECK(worst_single <= 1e-4);
  CHECK(worst_double <= 1e-9);
}

TEST_CASE("reference inference paths match the training-form layers") {
  std::mt19937_64 rng(55);
  RepVggBlock blk(4, 4, 1, "b");
  randomize_block(blk, rng);
  const std::size_t h = 6, w = 7;
  Tensor x({1, 4, h, w});
  for (auto& v : x.data) v = std::normal_distribution<double>(0.0, 1.0)(rng);
  const Tensor y = blk.forward(x, false);
  auto ref = block_infer_multibranch<double>(blk, x.data, h, w);
  for (auto& v : ref) v = std::max(0.0, v);
  REQUIRE(ref.size() == y.size());
  for (std::size_t i = 0; i < ref.size(); ++i)
    CHECK(y.data[i] == Catch::Approx(ref[i]).margin(1e-10));
}

TEST_CASE("fused inference is not slower than multi-branch") {
  std::mt19937_64 rng(99);
  RepVggBlock blk(32, 32, 1, "b");
  randomize_block(blk, rng);
  const FusedConv f = fuse_block(blk);
  Conv2d fused_layer(32, 32, 3, 1, 1, true, "fused");
  fused_layer.weight = f.weight;
  fused_layer.bias = f.bias;
  ReLU relu;
  Tensor x({4, 32, 32, 32});
  for (auto& v : x.data) v = std::normal_distribution<double>(0.0, 1.0)(rng);

  auto time_best = [](auto&& fn) {
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < 5; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      for (int i = 0; i < 10; ++i) fn();
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };

  blk.forward(x, false);
  fused_layer.forward(x);
  const double t_multi = time_best([&] { blk.forward(x, false); });
  const double t_fused = time_best([&] { relu.forward(fused_layer.forward(x)); });
  INFO("multi-branch " << t_multi << " s, fused " << t_fused << " s");
  CHECK(t_fused <= t_multi);
}

TEST_CASE("whole-model fusion preserves eval-mode outputs") {
  ModelConfig cfg;
  cfg.stage_layers = {1, 2, 1};
  cfg.stage_widths = {4, 6, 8};
  cfg.in_channels = 3;
  cfg.in_h = 16;
  cfg.in_w = 16;
  cfg.conv1d_channels = {4, 6};
  cfg.conv1d_kernel = 5;
  cfg.conv1d_stride = 3;
  cfg.spl_hidden = {8, 4};
  AcousticNet model(cfg);
  model.init_he(3);

  std::mt19937_64 rng(77);
  Tensor stack({2, 3, 16, 16});
  Tensor raw({2, 3, 64});
  for (auto& v : stack.data) v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (auto& v : raw.data) v = std::normal_distribution<double>(0.0, 0.2)(rng);

  // a couple of training steps so the running statistics are non-trivial
  for (int i = 0; i < 3; ++i) model.forward(stack, raw, true);

  const ModelOutput ref = model.forward(stack, raw, false);
  FusedAcousticNet fused = fuse_model(model);
  const ModelOutput got = fused.forward(stack, raw);
  for (std::size_t i = 0; i < ref.loc.size(); ++i)
    CHECK(got.loc.data[i] == Catch::Approx(ref.loc.data[i]).margin(1e-9));
  for (std::size_t i = 0; i < ref.spl.size(); ++i)
    CHECK(got.spl.data[i] == Catch::Approx(ref.spl.data[i]).margin(1e-9));
}
