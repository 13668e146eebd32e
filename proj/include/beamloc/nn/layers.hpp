// Trainable layers with hand-written backward passes. Double precision
// throughout; convolutions run as im2col + one GEMM per batch.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "beamloc/common.hpp"
#include "beamloc/nn/tensor.hpp"

namespace beamloc::nn {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

namespace detail {

inline std::size_t conv_out_len(std::size_t in, std::size_t k, std::size_t stride,
                                std::size_t pad) {
  if (in + 2 * pad < k) throw InvalidArgument("conv input smaller than kernel");
  return (in + 2 * pad - k) / stride + 1;
}

}  // namespace detail

class Conv2d {
 public:
  Conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t k, std::size_t stride,
         std::size_t pad, bool with_bias, std::string name)
      : weight(out_ch * in_ch * k * k, 0.0), wgrad(weight.size(), 0.0), in_ch_(in_ch),
        out_ch_(out_ch), k_(k), stride_(stride), pad_(pad), with_bias_(with_bias),
        name_(std::move(name)) {
    if (stride != 1 && stride != 2) throw InvalidArgument(name_ + ": stride must be 1 or 2");
    if (pad != 0 && pad != k / 2) throw InvalidArgument(name_ + ": pad must be 0 or k/2");
    if (with_bias_) {
      bias.assign(out_ch, 0.0);
      bgrad.assign(out_ch, 0.0);
    }
  }

  Tensor forward(const Tensor& x) {
    if (x.shape.size() != 4 || x.dim(1) != in_ch_)
      throw InvalidArgument(name_ + ": expected input [N, " + std::to_string(in_ch_) + ", H, W]");
    n_ = x.dim(0);
    h_ = x.dim(2);
    w_ = x.dim(3);
    oh_ = detail::conv_out_len(h_, k_, stride_, pad_);
    ow_ = detail::conv_out_len(w_, k_, stride_, pad_);
    const std::size_t patch = in_ch_ * k_ * k_;
    const std::size_t cols = n_ * oh_ * ow_;

    col_.assign(patch * cols, 0.0);
    for (std::size_t n = 0; n < n_; ++n) {
      const double* xin = x.ptr() + n * in_ch_ * h_ * w_;
      for (std::size_t c = 0; c < in_ch_; ++c)
        for (std::size_t ky = 0; ky < k_; ++ky)
          for (std::size_t kx = 0; kx < k_; ++kx) {
            const std::size_t row = (c * k_ + ky) * k_ + kx;
            double* dst = col_.data() + row * cols + n * oh_ * ow_;
            for (std::size_t oy = 0; oy < oh_; ++oy) {
              const std::ptrdiff_t iy =
                  static_cast<std::ptrdiff_t>(oy * stride_ + ky) - static_cast<std::ptrdiff_t>(pad_);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h_)) continue;
              for (std::size_t ox = 0; ox < ow_; ++ox) {
                const std::ptrdiff_t ix =
                    static_cast<std::ptrdiff_t>(ox * stride_ + kx) - static_cast<std::ptrdiff_t>(pad_);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w_)) continue;
                dst[oy * ow_ + ox] =
                    xin[(c * h_ + static_cast<std::size_t>(iy)) * w_ + static_cast<std::size_t>(ix)];
              }
            }
          }
    }

    Tensor y({n_, out_ch_, oh_, ow_});
    ConstMapMat wm(weight.data(), static_cast<Eigen::Index>(out_ch_),
                   static_cast<Eigen::Index>(patch));
    ConstMapMat cm(col_.data(), static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(cols));
    RowMat out = wm * cm;  // out_ch x (n * oh * ow), sample-major columns
    for (std::size_t n = 0; n < n_; ++n)
      for (std::size_t oc = 0; oc < out_ch_; ++oc) {
        const double b = with_bias_ ? bias[oc] : 0.0;
        double* dst = y.ptr() + (n * out_ch_ + oc) * oh_ * ow_;
        const double* src = out.data() + oc * cols + n * oh_ * ow_;
        for (std::size_t i = 0; i < oh_ * ow_; ++i) dst[i] = src[i] + b;
      }
    return y;
  }

  Tensor backward(const Tensor& gy) {
    gy.require_shape({n_, out_ch_, oh_, ow_}, name_.c_str());
    const std::size_t patch = in_ch_ * k_ * k_;
    const std::size_t cols = n_ * oh_ * ow_;

    RowMat gym(static_cast<Eigen::Index>(out_ch_), static_cast<Eigen::Index>(cols));
    for (std::size_t n = 0; n < n_; ++n)
      for (std::size_t oc = 0; oc < out_ch_; ++oc) {
        const double* src = gy.ptr() + (n * out_ch_ + oc) * oh_ * ow_;
        double* dst = gym.data() + oc * cols + n * oh_ * ow_;
        std::copy(src, src + oh_ * ow_, dst);
      }

    ConstMapMat cm(col_.data(), static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(cols));
    MapMat gw(wgrad.data(), static_cast<Eigen::Index>(out_ch_), static_cast<Eigen::Index>(patch));
    gw.noalias() += gym * cm.transpose();
    if (with_bias_)
      for (std::size_t oc = 0; oc < out_ch_; ++oc)
        bgrad[oc] += gym.row(static_cast<Eigen::Index>(oc)).sum();

    ConstMapMat wm(weight.data(), static_cast<Eigen::Index>(out_ch_),
                   static_cast<Eigen::Index>(patch));
    RowMat gcol = wm.transpose() * gym;  // patch x cols

    Tensor gx({n_, in_ch_, h_, w_});
    for (std::size_t n = 0; n < n_; ++n) {
      double* xout = gx.ptr() + n * in_ch_ * h_ * w_;
      for (std::size_t c = 0; c < in_ch_; ++c)
        for (std::size_t ky = 0; ky < k_; ++ky)
          for (std::size_t kx = 0; kx < k_; ++kx) {
            const std::size_t row = (c * k_ + ky) * k_ + kx;
            const double* src = gcol.data() + row * cols + n * oh_ * ow_;
            for (std::size_t oy = 0; oy < oh_; ++oy) {
              const std::ptrdiff_t iy =
                  static_cast<std::ptrdiff_t>(oy * stride_ + ky) - static_cast<std::ptrdiff_t>(pad_);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h_)) continue;
              for (std::size_t ox = 0; ox < ow_; ++ox) {
                const std::ptrdiff_t ix =
                    static_cast<std::ptrdiff_t>(ox * stride_ + kx) - static_cast<std::ptrdiff_t>(pad_);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w_)) continue;
                xout[(c * h_ + static_cast<std::size_t>(iy)) * w_ + static_cast<std::size_t>(ix)] +=
                    src[oy * ow_ + ox];
              }
            }
          }
    }
    return gx;
  }

  void collect(std::vector<ParamView>& out) {
    out.push_back({name_ + ".weight", &weight, &wgrad});
    if (with_bias_) out.push_back({name_ + ".bias", &bias, &bgrad});
  }

  std::size_t in_channels() const { return in_ch_; }
  std::size_t out_channels() const { return out_ch_; }
  std::size_t kernel() const { return k_; }
  std::size_t stride() const { return stride_; }
  std::size_t fan_in() const { return in_ch_ * k_ * k_; }
  const std::string& name() const { return name_; }

  std::vector<double> weight, bias, wgrad, bgrad;

 private:
  std::size_t in_ch_, out_ch_, k_, stride_, pad_;
  bool with_bias_;
  std::string name_;
  std::size_t n_ = 0, h_ = 0, w_ = 0, oh_ = 0, ow_ = 0;
  std::vector<double> col_;
};

class Conv1d {
 public:
  Conv1d(std::size_t in_ch, std::size_t out_ch, std::size_t k, std::size_t stride,
         std::string name)
      : weight(out_ch * in_ch * k, 0.0), bias(out_ch, 0.0), wgrad(weight.size(), 0.0),
        bgrad(out_ch, 0.0), in_ch_(in_ch), out_ch_(out_ch), k_(k), stride_(stride),
        name_(std::move(name)) {}

  Tensor forward(const Tensor& x) {
    if (x.shape.size() != 3 || x.dim(1) != in_ch_)
      throw InvalidArgument(name_ + ": expected input [N, " + std::to_string(in_ch_) + ", L]");
    n_ = x.dim(0);
    l_ = x.dim(2);
    ol_ = detail::conv_out_len(l_, k_, stride_, 0);
    const std::size_t patch = in_ch_ * k_;
    const std::size_t cols = n_ * ol_;

    col_.assign(patch * cols, 0.0);
    for (std::size_t n = 0; n < n_; ++n) {
      const double* xin = x.ptr() + n * in_ch_ * l_;
      for (std::size_t c = 0; c < in_ch_; ++c)
        for (std::size_t kk = 0; kk < k_; ++kk) {
          double* dst = col_.data() + (c * k_ + kk) * cols + n * ol_;
          for (std::size_t o = 0; o < ol_; ++o) dst[o] = xin[c * l_ + o * stride_ + kk];
        }
    }

    Tensor y({n_, out_ch_, ol_});
    ConstMapMat wm(weight.data(), static_cast<Eigen::Index>(out_ch_),
                   static_cast<Eigen::Index>(patch));
    ConstMapMat cm(col_.data(), static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(cols));
    RowMat out = wm * cm;
    for (std::size_t n = 0; n < n_; ++n)
      for (std::size_t oc = 0; oc < out_ch_; ++oc) {
        double* dst = y.ptr() + (n * out_ch_ + oc) * ol_;
        const double* src = out.data() + oc * cols + n * ol_;
        for (std::size_t i = 0; i < ol_; ++i) dst[i] = src[i] + bias[oc];
      }
    return y;
  }

  Tensor backward(const Tensor& gy) {
    gy.require_shape({n_, out_ch_, ol_}, name_.c_str());
    const std::size_t patch = in_ch_ * k_;
    const std::size_t cols = n_ * ol_;

    RowMat gym(static_cast<Eigen::Index>(out_ch_), static_cast<Eigen::Index>(cols));
    for (std::size_t n = 0; n < n_; ++n)
      for (std::size_t oc = 0; oc < out_ch_; ++oc) {
        const double* src = gy.ptr() + (n * out_ch_ + oc) * ol_;
        std::copy(src, src + ol_, gym.data() + oc * cols + n * ol_);
      }

    ConstMapMat cm(col_.data(), static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(cols));
    MapMat gw(wgrad.data(), static_cast<Eigen::Index>(out_ch_), static_cast<Eigen::Index>(patch));
    gw.noalias() += gym * cm.transpose();
    for (std::size_t oc = 0; oc < out_ch_; ++oc)
      bgrad[oc] += gym.row(static_cast<Eigen::Index>(oc)).sum();

    ConstMapMat wm(weight.data(), static_cast<Eigen::Index>(out_ch_),
                   static_cast<Eigen::Index>(patch));
    RowMat gcol = wm.transpose() * gym;

    Tensor gx({n_, in_ch_, l_});
    for (std::size_t n = 0; n < n_; ++n) {
      double* xout = gx.ptr() + n * in_ch_ * l_;
      for (std::size_t c = 0; c < in_ch_; ++c)
        for (std::size_t kk = 0; kk < k_; ++kk) {
          const double* src = gcol.data() + (c * k_ + kk) * cols + n * ol_;
          for (std::size_t o = 0; o < ol_; ++o) xout[c * l_ + o * stride_ + kk] += src[o];
        }
    }
    return gx;
  }

  void collect(std::vector<ParamView>& out) {
    out.push_back({name_ + ".weight", &weight, &wgrad});
    out.push_back({name_ + ".bias", &bias, &bgrad});
  }

  std::size_t fan_in() const { return in_ch_ * k_; }
  const std::string& name() const { return name_; }

  std::vector<double> weight, bias, wgrad, bgrad;

 private:
  std::size_t in_ch_, out_ch_, k_, stride_;
  std::string name_;
  std::size_t n_ = 0, l_ = 0, ol_ = 0;
  std::vector<double> col_;
};

class Dense {
 public:
  Dense(std::size_t in, std::size_t out, std::string name)
      : weight(out * in, 0.0), bias(out, 0.0), wgrad(out * in, 0.0), bgrad(out, 0.0), in_(in),
        out_(out), name_(std::move(name)) {}

  Tensor forward(const Tensor& x) {
    if (x.shape.size() != 2 || x.dim(1) != in_)
      throw InvalidArgument(name_ + ": expected input [N, " + std::to_string(in_) + "]");
    x_ = x;
    const auto n = static_cast<Eigen::Index>(x.dim(0));
    Tensor y({x.dim(0), out_});
    ConstMapMat xm(x.ptr(), n, static_cast<Eigen::Index>(in_));
    ConstMapMat wm(weight.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
    MapMat ym(y.ptr(), n, static_cast<Eigen::Index>(out_));
    ym.noalias() = xm * wm.transpose();
    for (Eigen::Index r = 0; r < n; ++r)
      for (std::size_t c = 0; c < out_; ++c) ym(r, static_cast<Eigen::Index>(c)) += bias[c];
    return y;
  }

  Tensor backward(const Tensor& gy) {
    const std::size_t nb = x_.dim(0);
    gy.require_shape({nb, out_}, name_.c_str());
    const auto n = static_cast<Eigen::Index>(nb);
    ConstMapMat gym(gy.ptr(), n, static_cast<Eigen::Index>(out_));
    ConstMapMat xm(x_.ptr(), n, static_cast<Eigen::Index>(in_));
    MapMat gw(wgrad.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
    gw.noalias() += gym.transpose() * xm;
    for (std::size_t c = 0; c < out_; ++c)
      bgrad[c] += gym.col(static_cast<Eigen::Index>(c)).sum();
    Tensor gx({nb, in_});
    ConstMapMat wm(weight.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
    MapMat gxm(gx.ptr(), n, static_cast<Eigen::Index>(in_));
    gxm.noalias() = gym * wm;
    return gx;
  }

  void collect(std::vector<ParamView>& out) {
    out.push_back({name_ + ".weight", &weight, &wgrad});
    out.push_back({name_ + ".bias", &bias, &bgrad});
  }

  std::size_t fan_in() const { return in_; }
  const std::string& name() const { return name_; }

  std::vector<double> weight, bias, wgrad, bgrad;

 private:
  std::size_t in_, out_;
  std::string name_;
  Tensor x_;
};

// Per-channel batch normalization over [N, C, H, W] (or any layout whose
// channel dim is dim 1 and remaining dims are spatial). Training mode uses
// biased batch statistics and updates running stats as
// running = 0.9 * running + 0.1 * batch.
class BatchNorm {
 public:
  BatchNorm(std::size_t channels, std::string name, double eps = 1e-5)
      : gamma(channels, 1.0), beta(channels, 0.0), ggrad(channels, 0.0), bgrad(channels, 0.0),
        running_mean(channels, 0.0), running_var(channels, 1.0), c_(channels), eps_(eps),
        name_(std::move(name)) {}

  Tensor forward(const Tensor& x, bool train) {
    if (x.shape.size() < 2 || x.dim(1) != c_)
      throw InvalidArgument(name_ + ": channel count mismatch");
    shape_ = x.shape;
    n_ = x.dim(0);
    spatial_ = x.size() / (n_ * c_);
    train_ = train;

    Tensor y(x.shape);
    const std::size_t m = n_ * spatial_;
    if (train) {
      mean_.assign(c_, 0.0);
      invstd_.assign(c_, 0.0);
      xhat_.assign(x.size(), 0.0);
      for (std::size_t c = 0; c < c_; ++c) {
        double mu = 0.0;
        for (std::size_t n = 0; n < n_; ++n) {
          const double* p = x.ptr() + (n * c_ + c) * spatial_;
          for (std::size_t i = 0; i < spatial_; ++i) mu += p[i];
        }
        mu /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t n = 0; n < n_; ++n) {
          const double* p = x.ptr() + (n * c_ + c) * spatial_;
          for (std::size_t i = 0; i < spatial_; ++i) var += (p[i] - mu) * (p[i] - mu);
        }
        var /= static_cast<double>(m);
        mean_[c] = mu;
        invstd_[c] = 1.0 / std::sqrt(var + eps_);
        running_mean[c] = 0.9 * running_mean[c] + 0.1 * mu;
        running_var[c] = 0.9 * running_var[c] + 0.1 * var;
        for (std::size_t n = 0; n < n_; ++n) {
          const double* p = x.ptr() + (n * c_ + c) * spatial_;
          double* xh = xhat_.data() + (n * c_ + c) * spatial_;
          double* py = y.ptr() + (n * c_ + c) * spatial_;
          for (std::size_t i = 0; i < spatial_; ++i) {
            xh[i] = (p[i] - mu) * invstd_[c];
            py[i] = gamma[c] * xh[i] + beta[c];
          }
        }
      }
    } else {
      for (std::size_t c = 0; c < c_; ++c) {
        const double invstd = 1.0 / std::sqrt(running_var[c] + eps_);
        const double a = gamma[c] * invstd;
        const double b = beta[c] - a * running_mean[c];
        for (std::size_t n = 0; n < n_; ++n) {
          const double* p = x.ptr() + (n * c_ + c) * spatial_;
          double* py = y.ptr() + (n * c_ + c) * spatial_;
          for (std::size_t i = 0; i < spatial_; ++i) py[i] = a * p[i] + b;
        }
      }
    }
    return y;
  }

  Tensor backward(const Tensor& gy) {
    gy.require_shape(shape_, name_.c_str());
    Tensor gx(shape_);
    const double m = static_cast<double>(n_ * spatial_);
    if (train_) {
      for (std::size_t c = 0; c < c_; ++c) {
        double sum_gy = 0.0, sum_gy_xhat = 0.0;
        for (std::size_t n = 0; n < n_; ++n) {
          const double* g = gy.ptr() + (n * c_ + c) * spatial_;
          const double* xh = xhat_.data() + (n * c_ + c) * spatial_;
          for (std::size_t i = 0; i < spatial_; ++i) {
            sum_gy += g[i];
            sum_gy_xhat += g[i] * xh[i];
          }
        }
        ggrad[c] += sum_gy_xhat;
        bgrad[c] += sum_gy;
        const double scale = gamma[c] * invstd_[c] / m;
        for (std::size_t n = 0; n < n_; ++n) {
          const double* g = gy.ptr() + (n * c_ + c) * spatial_;
          const double* xh = xhat_.data() + (n * c_ + c) * spatial_;
          double* o = gx.ptr() + (n * c_ + c) * spatial_;
          for (std::size_t i = 0; i < spatial_; ++i)
            o[i] = scale * (m * g[i] - sum_gy - xh[i] * sum_gy_xhat);
        }
      }
    } else {
      for (std::size_t c = 0; c < c_; ++c) {
        const double a = gamma[c] / std::sqrt(running_var[c] + eps_);
        for (std::size_t n = 0; n < n_; ++n) {
          const double* g = gy.ptr() + (n * c_ + c) * spatial_;
          double* o = gx.ptr() + (n * c_ + c) * spatial_;
          for (std::size_t i = 0; i < spatial_; ++i) o[i] = a * g[i];
        }
      }
    }
    return gx;
  }

  void collect(std::vector<ParamView>& out) {
    out.push_back({name_ + ".gamma", &gamma, &ggrad});
    out.push_back({name_ + ".beta", &beta, &bgrad});
  }
  void collect_state(std::vector<StateView>& out) {
    out.push_back({name_ + ".running_mean", &running_mean});
    out.push_back({name_ + ".running_var", &running_var});
  }

  double eps() const { return eps_; }
  std::size_t channels() const { return c_; }
  const std::string& name() const { return name_; }

  std::vector<double> gamma, beta, ggrad, bgrad, running_mean, running_var;

 private:
  std::size_t c_;
  double eps_;
  std::string name_;
  std::vector<std::size_t> shape_;
  std::size_t n_ = 0, spatial_ = 0;
  bool train_ = false;
  std::vector<double> mean_, invstd_, xhat_;
};

class ReLU {
 public:
  Tensor forward(const Tensor& x) {
    mask_.assign(x.size(), 0);
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x.data[i] > 0.0) {
        y.data[i] = x.data[i];
        mask_[i] = 1;
      }
    }
    return y;
  }
  Tensor backward(const Tensor& gy) {
    if (gy.size() != mask_.size()) throw InvalidArgument("relu: gradient shape mismatch");
    Tensor gx(gy.shape);
    for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] = mask_[i] ? gy.data[i] : 0.0;
    return gx;
  }

 private:
  std::vector<unsigned char> mask_;
};

// Mean over all trailing spatial dims: [N, C, ...] -> [N, C].
class GlobalAvgPool {
 public:
  Tensor forward(const Tensor& x) {
    if (x.shape.size() < 3) throw InvalidArgument("global_avg_pool: rank must be >= 3");
    shape_ = x.shape;
    const std::size_t n = x.dim(0), c = x.dim(1);
    spatial_ = x.size() / (n * c);
    Tensor y({n, c});
    for (std::size_t i = 0; i < n * c; ++i) {
      const double* p = x.ptr() + i * spatial_;
      double acc = 0.0;
      for (std::size_t j = 0; j < spatial_; ++j) acc += p[j];
      y.data[i] = acc / static_cast<double>(spatial_);
    }
    return y;
  }
  Tensor backward(const Tensor& gy) {
    gy.require_shape({shape_[0], shape_[1]}, "global_avg_pool");
    Tensor gx(shape_);
    const double inv = 1.0 / static_cast<double>(spatial_);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      double* p = gx.ptr() + i * spatial_;
      const double v = gy.data[i] * inv;
      for (std::size_t j = 0; j < spatial_; ++j) p[j] = v;
    }
    return gx;
  }

 private:
  std::vector<std::size_t> shape_;
  std::size_t spatial_ = 1;
};

}  // namespace beamloc::nn
