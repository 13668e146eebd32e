// Multi-branch convolution block (3x3 + 1x1 + optional identity, each
// batch-normalized, summed, ReLU) and its re-parameterization into a single
// biased 3x3 convolution for inference.
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "beamloc/common.hpp"
#include "beamloc/nn/layers.hpp"
#include "beamloc/nn/tensor.hpp"

namespace beamloc::nn {

class RepVggBlock {
 public:
  RepVggBlock(std::size_t in_ch, std::size_t out_ch, std::size_t stride, std::string name,
              double eps = 1e-5)
      : name_(std::move(name)),
        conv3(in_ch, out_ch, 3, stride, 1, false, name_ + ".conv3x3"),
        conv1(in_ch, out_ch, 1, stride, 0, false, name_ + ".conv1x1"),
        bn3(out_ch, name_ + ".bn3x3", eps),
        bn1(out_ch, name_ + ".bn1x1", eps) {
    if (in_ch == out_ch && stride == 1) bnid.emplace(out_ch, name_ + ".bnid", eps);
  }

  Tensor forward(const Tensor& x, bool train) {
    Tensor sum = bn3.forward(conv3.forward(x), train);
    {
      const Tensor b1 = bn1.forward(conv1.forward(x), train);
      for (std::size_t i = 0; i < sum.size(); ++i) sum.data[i] += b1.data[i];
    }
    if (bnid) {
      const Tensor bi = bnid->forward(x, train);
      if (bi.size() != sum.size()) throw InvalidArgument(name_ + ": identity branch shape mismatch");
      for (std::size_t i = 0; i < sum.size(); ++i) sum.data[i] += bi.data[i];
    }
    return relu_.forward(sum);
  }

  Tensor backward(const Tensor& gy) {
    const Tensor gs = relu_.backward(gy);
    Tensor gx = conv3.backward(bn3.backward(gs));
    {
      const Tensor g1 = conv1.backward(bn1.backward(gs));
      for (std::size_t i = 0; i < gx.size(); ++i) gx.data[i] += g1.data[i];
    }
    if (bnid) {
      const Tensor gi = bnid->backward(gs);
      for (std::size_t i = 0; i < gx.size(); ++i) gx.data[i] += gi.data[i];
    }
    return gx;
  }

  void collect(std::vector<ParamView>& out) {
    conv3.collect(out);
    bn3.collect(out);
    conv1.collect(out);
    bn1.collect(out);
    if (bnid) bnid->collect(out);
  }
  void collect_state(std::vector<StateView>& out) {
    bn3.collect_state(out);
    bn1.collect_state(out);
    if (bnid) bnid->collect_state(out);
  }

  std::size_t in_channels() const { return conv3.in_channels(); }
  std::size_t out_channels() const { return conv3.out_channels(); }
  std::size_t stride() const { return conv3.stride(); }
  bool has_identity() const { return bnid.has_value(); }
  const std::string& name() const { return name_; }

  std::string name_;
  Conv2d conv3, conv1;
  BatchNorm bn3, bn1;
  std::optional<BatchNorm> bnid;

 private:
  ReLU relu_;
};

// Inference-form block: one biased 3x3 convolution (ReLU applied by the
// caller, as in the training form).
struct FusedConv {
  std::size_t in_ch = 0, out_ch = 0, stride = 1;
  std::vector<double> weight;  // [out_ch x in_ch*3*3], conv2d layout
  std::vector<double> bias;    // [out_ch]
};

// Folds each branch's batch norm into an affine convolution using the
// running statistics, then sums the three kernels:
//   W' = W * gamma / sqrt(var + eps),  b' = beta - gamma * mu / sqrt(var + eps)
// The 1x1 kernel embeds at the 3x3 center; the identity branch becomes a
// per-channel center-one delta kernel.
inline FusedConv fuse_block(const RepVggBlock& blk) {
  const std::size_t ic = blk.in_channels(), oc = blk.out_channels();
  FusedConv f;
  f.in_ch = ic;
  f.out_ch = oc;
  f.stride = blk.stride();
  f.weight.assign(oc * ic * 9, 0.0);
  f.bias.assign(oc, 0.0);

  for (std::size_t o = 0; o < oc; ++o) {
    const double s3 = blk.bn3.gamma[o] / std::sqrt(blk.bn3.running_var[o] + blk.bn3.eps());
    for (std::size_t i = 0; i < ic * 9; ++i)
      f.weight[o * ic * 9 + i] += s3 * blk.conv3.weight[o * ic * 9 + i];
    f.bias[o] += blk.bn3.beta[o] - s3 * blk.bn3.running_mean[o];

    const double s1 = blk.bn1.gamma[o] / std::sqrt(blk.bn1.running_var[o] + blk.bn1.eps());
    for (std::size_t c = 0; c < ic; ++c)
      f.weight[(o * ic + c) * 9 + 4] += s1 * blk.conv1.weight[o * ic + c];
    f.bias[o] += blk.bn1.beta[o] - s1 * blk.bn1.running_mean[o];

    if (blk.bnid) {
      const auto& bi = *blk.bnid;
      const double si = bi.gamma[o] / std::sqrt(bi.running_var[o] + bi.eps());
      f.weight[(o * ic + o) * 9 + 4] += si;
      f.bias[o] += bi.beta[o] - si * bi.running_mean[o];
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Reference inference paths, templated on the scalar so the equivalence of
// fused and multi-branch forms can be checked in both single and double
// precision. Direct convolution loops, independent of the im2col layers.
// ---------------------------------------------------------------------------

template <typename T>
std::vector<T> conv_infer(const std::vector<T>& x, std::size_t c_in, std::size_t h, std::size_t w,
                          const std::vector<T>& kernel, std::size_t c_out, std::size_t k,
                          std::size_t stride, std::size_t pad, const std::vector<T>* bias) {
  const std::size_t oh = (h + 2 * pad - k) / stride + 1;
  const std::size_t ow = (w + 2 * pad - k) / stride + 1;
  std::vector<T> y(c_out * oh * ow, T(0));
  for (std::size_t o = 0; o < c_out; ++o)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        T acc = bias ? (*bias)[o] : T(0);
        for (std::size_t c = 0; c < c_in; ++c)
          for (std::size_t ky = 0; ky < k; ++ky) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(pad);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              acc += kernel[((o * c_in + c) * k + ky) * k + kx] *
                     x[(c * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)];
            }
          }
        y[(o * oh + oy) * ow + ox] = acc;
      }
  return y;
}

template <typename T>
std::vector<T> cast_params(const std::vector<double>& v) {
  return std::vector<T>(v.begin(), v.end());
}

// Multi-branch inference (running statistics, no ReLU) for one sample.
template <typename T>
std::vector<T> block_infer_multibranch(const RepVggBlock& blk, const std::vector<T>& x,
                                       std::size_t h, std::size_t w) {
  const std::size_t ic = blk.in_channels(), oc = blk.out_channels(), s = blk.stride();
  auto bn_affine = [](const BatchNorm& bn, std::size_t ch, std::vector<T>& v, std::size_t spatial) {
    for (std::size_t c = 0; c < ch; ++c) {
      const T a = static_cast<T>(bn.gamma[c] / std::sqrt(bn.running_var[c] + bn.eps()));
      const T b = static_cast<T>(bn.beta[c]) - a * static_cast<T>(bn.running_mean[c]);
      for (std::size_t i = 0; i < spatial; ++i) v[c * spatial + i] = a * v[c * spatial + i] + b;
    }
  };
  const std::size_t oh = (h - 1) / s + 1, ow = (w - 1) / s + 1;
  auto y3 = conv_infer<T>(x, ic, h, w, cast_params<T>(blk.conv3.weight), oc, 3, s, 1, nullptr);
  bn_affine(blk.bn3, oc, y3, oh * ow);
  auto y1 = conv_infer<T>(x, ic, h, w, cast_params<T>(blk.conv1.weight), oc, 1, s, 0, nullptr);
  bn_affine(blk.bn1, oc, y1, oh * ow);
  for (std::size_t i = 0; i < y3.size(); ++i) y3[i] += y1[i];
  if (blk.bnid) {
    std::vector<T> yi = x;
    bn_affine(*blk.bnid, oc, yi, h * w);
    for (std::size_t i = 0; i < y3.size(); ++i) y3[i] += yi[i];
  }
  return y3;
}

// Fused inference (no ReLU) for one sample.
template <typename T>
std::vector<T> block_infer_fused(const FusedConv& f, const std::vector<T>& x, std::size_t h,
                                 std::size_t w) {
  const auto bias = cast_params<T>(f.bias);
  return conv_infer<T>(x, f.in_ch, h, w, cast_params<T>(f.weight), f.out_ch, 3, f.stride, 1,
                       &bias);
}

}  // namespace beamloc::nn
