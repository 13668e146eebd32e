// The trainable localization/quantification network: multi-branch conv trunk
// over the spectrogram stack feeding a location head, a 1D-conv branch over
// downsampled raw waveforms, and a shared SPL head on the concatenated
// features. Includes the multi-task loss and the fused inference form.
#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "beamloc/common.hpp"
#include "beamloc/nn/layers.hpp"
#include "beamloc/nn/repvgg.hpp"
#include "beamloc/nn/tensor.hpp"

namespace beamloc::nn {

// Targets are normalized for optimization (positions to [-1, 1] by the scan
// half-extent, SPL by 1/100); reported losses and metrics undo the scaling.
inline constexpr double kPosScale = 1.5;
inline constexpr double kSplScale = 100.0;

struct ModelConfig {
  std::vector<std::size_t> stage_layers{1, 2, 2, 2, 1};
  std::vector<std::size_t> stage_widths{8, 8, 16, 32, 64};
  std::size_t in_channels = 56;
  std::size_t in_h = 64;
  std::size_t in_w = 64;
  std::vector<std::size_t> conv1d_channels{16, 32, 64};
  std::size_t conv1d_kernel = 7;
  std::size_t conv1d_stride = 4;
  std::vector<std::size_t> spl_hidden{64, 32, 16};
  std::size_t raw_downsample = 8;

  void validate() const {
    if (stage_layers.size() != stage_widths.size() || stage_layers.empty())
      throw InvalidArgument("model: stage_layers and stage_widths must be non-empty and equal length");
    for (auto v : stage_layers)
      if (v == 0) throw InvalidArgument("model: every stage needs at least one block");
    for (auto v : stage_widths)
      if (v == 0) throw InvalidArgument("model: stage widths must be positive");
    if (in_channels == 0 || in_h == 0 || in_w == 0)
      throw InvalidArgument("model: input dims must be positive");
    if (conv1d_channels.empty()) throw InvalidArgument("model: conv1d branch needs channels");
    for (auto v : conv1d_channels)
      if (v == 0) throw InvalidArgument("model: conv1d channels must be positive");
    if (conv1d_kernel == 0 || conv1d_stride == 0)
      throw InvalidArgument("model: conv1d kernel/stride must be positive");
    if (spl_hidden.empty()) throw InvalidArgument("model: spl head needs hidden dims");
    if (raw_downsample == 0) throw InvalidArgument("model: raw_downsample must be positive");
    if ((in_h >> stage_layers.size()) == 0 || (in_w >> stage_layers.size()) == 0)
      throw InvalidArgument("model: input smaller than the trunk's total downsampling");
  }
};

inline nlohmann::json model_config_json(const ModelConfig& c) {
  return nlohmann::json{{"stage_layers", c.stage_layers},
                        {"stage_widths", c.stage_widths},
                        {"in_channels", c.in_channels},
                        {"in_h", c.in_h},
                        {"in_w", c.in_w},
                        {"conv1d_channels", c.conv1d_channels},
                        {"conv1d_kernel", c.conv1d_kernel},
                        {"conv1d_stride", c.conv1d_stride},
                        {"spl_hidden", c.spl_hidden},
                        {"raw_downsample", c.raw_downsample}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  j.at("stage_layers").get_to(c.stage_layers);
  j.at("stage_widths").get_to(c.stage_widths);
  j.at("in_channels").get_to(c.in_channels);
  j.at("in_h").get_to(c.in_h);
  j.at("in_w").get_to(c.in_w);
  j.at("conv1d_channels").get_to(c.conv1d_channels);
  j.at("conv1d_kernel").get_to(c.conv1d_kernel);
  j.at("conv1d_stride").get_to(c.conv1d_stride);
  j.at("spl_hidden").get_to(c.spl_hidden);
  j.at("raw_downsample").get_to(c.raw_downsample);
  c.validate();
  return c;
}

struct LocSpl {
  double x = 0.0;
  double y = 0.0;
  double spl = 0.0;
};

// Mean over samples of alpha * ||X - X_hat||^2 + |SPL - SPL_hat|, in the
// units of its arguments.
inline double mtl_loss(const std::vector<LocSpl>& pred, const std::vector<LocSpl>& truth,
                       double alpha) {
  if (pred.empty() || pred.size() != truth.size())
    throw InvalidArgument("loss: prediction/target size mismatch");
  if (alpha <= 0.0) throw InvalidArgument("loss: alpha must be positive");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dx = pred[i].x - truth[i].x;
    const double dy = pred[i].y - truth[i].y;
    acc += alpha * (dx * dx + dy * dy) + std::abs(pred[i].spl - truth[i].spl);
  }
  return acc / static_cast<double>(pred.size());
}

struct ModelOutput {
  Tensor loc;  // [N, 2], normalized coordinates
  Tensor spl;  // [N, 1], normalized SPL
};

struct BatchLoss {
  double loss_norm = 0.0;   // optimization objective on normalized targets
  double loss_paper = 0.0;  // same functional on physical units, for reports
  Tensor dloc;              // d loss_norm / d loc
  Tensor dspl;              // d loss_norm / d spl
};

inline BatchLoss mtl_loss_grads(const ModelOutput& out, const std::vector<LocSpl>& truth,
                                double alpha) {
  const std::size_t n = truth.size();
  if (n == 0) throw InvalidArgument("loss: empty batch");
  out.loc.require_shape({n, 2}, "loss");
  out.spl.require_shape({n, 1}, "loss");
  BatchLoss r;
  r.dloc = Tensor({n, 2});
  r.dspl = Tensor({n, 1});
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tx = truth[i].x / kPosScale;
    const double ty = truth[i].y / kPosScale;
    const double ts = truth[i].spl / kSplScale;
    const double dx = out.loc.data[2 * i] - tx;
    const double dy = out.loc.data[2 * i + 1] - ty;
    const double ds = out.spl.data[i] - ts;
    r.loss_norm += alpha * (dx * dx + dy * dy) + std::abs(ds);
    r.loss_paper += alpha * kPosScale * kPosScale * (dx * dx + dy * dy) +
                    kSplScale * std::abs(ds);
    r.dloc.data[2 * i] = 2.0 * alpha * dx * inv_n;
    r.dloc.data[2 * i + 1] = 2.0 * alpha * dy * inv_n;
    r.dspl.data[i] = (ds > 0.0 ? 1.0 : (ds < 0.0 ? -1.0 : 0.0)) * inv_n;
  }
  r.loss_norm *= inv_n;
  r.loss_paper *= inv_n;
  return r;
}

class AcousticNet {
 public:
  explicit AcousticNet(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    std::size_t in_ch = cfg_.in_channels;
    for (std::size_t s = 0; s < cfg_.stage_layers.size(); ++s) {
      for (std::size_t b = 0; b < cfg_.stage_layers[s]; ++b) {
        const std::size_t stride = (b == 0) ? 2 : 1;
        trunk_.emplace_back(in_ch, cfg_.stage_widths[s], stride,
                            "stage" + std::to_string(s) + ".block" + std::to_string(b));
        in_ch = cfg_.stage_widths[s];
      }
    }
    const std::size_t feat = cfg_.stage_widths.back();
    loc_head_ = std::make_unique<Dense>(feat, 2, "loc_head");

    std::size_t ch = cfg_.in_channels;
    for (std::size_t i = 0; i < cfg_.conv1d_channels.size(); ++i) {
      branch1d_.emplace_back(ch, cfg_.conv1d_channels[i], cfg_.conv1d_kernel, cfg_.conv1d_stride,
                             "branch1d.conv" + std::to_string(i));
      ch = cfg_.conv1d_channels[i];
    }
    branch_relu_.resize(branch1d_.size());

    std::size_t d_in = feat + ch;
    for (std::size_t i = 0; i < cfg_.spl_hidden.size(); ++i) {
      spl_dense_.emplace_back(d_in, cfg_.spl_hidden[i], "spl_head.dense" + std::to_string(i));
      d_in = cfg_.spl_hidden[i];
    }
    spl_dense_.emplace_back(d_in, 1, "spl_head.dense" + std::to_string(cfg_.spl_hidden.size()));
    spl_relu_.resize(cfg_.spl_hidden.size());
  }

  const ModelConfig& config() const { return cfg_; }

  // He-normal weights, zero biases, default batch-norm state; fill order is
  // the fixed graph order, so one seed pins every parameter.
  void init_he(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto fill = [&rng](std::vector<double>& w, std::size_t fan_in) {
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
      for (auto& v : w) v = dist(rng);
    };
    for (auto& blk : trunk_) {
      fill(blk.conv3.weight, blk.conv3.fan_in());
      fill(blk.conv1.weight, blk.conv1.fan_in());
    }
    fill(loc_head_->weight, loc_head_->fan_in());
    std::fill(loc_head_->bias.begin(), loc_head_->bias.end(), 0.0);
    for (auto& c : branch1d_) {
      fill(c.weight, c.fan_in());
      std::fill(c.bias.begin(), c.bias.end(), 0.0);
    }
    for (auto& d : spl_dense_) {
      fill(d.weight, d.fan_in());
      std::fill(d.bias.begin(), d.bias.end(), 0.0);
    }
  }

  ModelOutput forward(const Tensor& stack, const Tensor& raw, bool train) {
    if (stack.shape.size() != 4 || stack.dim(1) != cfg_.in_channels ||
        stack.dim(2) != cfg_.in_h || stack.dim(3) != cfg_.in_w)
      throw InvalidArgument("model: stack input dims do not match the config");
    if (raw.shape.size() != 3 || raw.dim(0) != stack.dim(0) || raw.dim(1) != cfg_.in_channels)
      throw InvalidArgument("model: raw input dims do not match the config");

    Tensor t = stack;
    for (auto& blk : trunk_) t = blk.forward(t, train);
    const Tensor feat = trunk_gap_.forward(t);
    ModelOutput out;
    out.loc = loc_head_->forward(feat);

    Tensor r = raw;
    for (std::size_t i = 0; i < branch1d_.size(); ++i)
      r = branch_relu_[i].forward(branch1d_[i].forward(r));
    const Tensor feat1d = branch_gap_.forward(r);

    feat_dim_ = feat.dim(1);
    feat1d_dim_ = feat1d.dim(1);
    const std::size_t n = feat.dim(0);
    Tensor cat({n, feat_dim_ + feat1d_dim_});
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(feat.ptr() + i * feat_dim_, feat.ptr() + (i + 1) * feat_dim_,
                cat.ptr() + i * (feat_dim_ + feat1d_dim_));
      std::copy(feat1d.ptr() + i * feat1d_dim_, feat1d.ptr() + (i + 1) * feat1d_dim_,
                cat.ptr() + i * (feat_dim_ + feat1d_dim_) + feat_dim_);
    }

    Tensor h = cat;
    for (std::size_t i = 0; i < spl_dense_.size(); ++i) {
      h = spl_dense_[i].forward(h);
      if (i + 1 < spl_dense_.size()) h = spl_relu_[i].forward(h);
    }
    out.spl = h;
    return out;
  }

  void backward(const Tensor& dloc, const Tensor& dspl) {
    Tensor g = dspl;
    for (std::size_t i = spl_dense_.size(); i-- > 0;) {
      g = spl_dense_[i].backward(g);
      if (i > 0) g = spl_relu_[i - 1].backward(g);
    }
    const std::size_t n = g.dim(0);
    Tensor gfeat({n, feat_dim_});
    Tensor gfeat1d({n, feat1d_dim_});
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(g.ptr() + i * (feat_dim_ + feat1d_dim_),
                g.ptr() + i * (feat_dim_ + feat1d_dim_) + feat_dim_, gfeat.ptr() + i * feat_dim_);
      std::copy(g.ptr() + i * (feat_dim_ + feat1d_dim_) + feat_dim_,
                g.ptr() + (i + 1) * (feat_dim_ + feat1d_dim_), gfeat1d.ptr() + i * feat1d_dim_);
    }

    const Tensor gloc_feat = loc_head_->backward(dloc);
    for (std::size_t i = 0; i < gfeat.size(); ++i) gfeat.data[i] += gloc_feat.data[i];

    Tensor gt = trunk_gap_.backward(gfeat);
    for (std::size_t i = trunk_.size(); i-- > 0;) gt = trunk_[i].backward(gt);

    Tensor g1 = branch_gap_.backward(gfeat1d);
    for (std::size_t i = branch1d_.size(); i-- > 0;) {
      g1 = branch_relu_[i].backward(g1);
      g1 = branch1d_[i].backward(g1);
    }
  }

  std::vector<ParamView> params() {
    std::vector<ParamView> out;
    for (auto& blk : trunk_) blk.collect(out);
    loc_head_->collect(out);
    for (auto& c : branch1d_) c.collect(out);
    for (auto& d : spl_dense_) d.collect(out);
    return out;
  }

  std::vector<StateView> state() {
    std::vector<StateView> out;
    for (auto& blk : trunk_) blk.collect_state(out);
    return out;
  }

  void zero_grad() {
    for (auto& p : params()) std::fill(p.grad->begin(), p.grad->end(), 0.0);
  }

  std::vector<RepVggBlock>& trunk() { return trunk_; }
  const std::vector<RepVggBlock>& trunk() const { return trunk_; }
  std::vector<Conv1d>& branch1d() { return branch1d_; }
  const std::vector<Conv1d>& branch1d() const { return branch1d_; }
  std::vector<Dense>& spl_dense() { return spl_dense_; }
  const std::vector<Dense>& spl_dense() const { return spl_dense_; }
  Dense& loc_head() { return *loc_head_; }
  const Dense& loc_head() const { return *loc_head_; }

 private:
  ModelConfig cfg_;
  std::vector<RepVggBlock> trunk_;
  GlobalAvgPool trunk_gap_, branch_gap_;
  std::unique_ptr<Dense> loc_head_;
  std::vector<Conv1d> branch1d_;
  std::vector<ReLU> branch_relu_;
  std::vector<Dense> spl_dense_;
  std::vector<ReLU> spl_relu_;
  std::size_t feat_dim_ = 0, feat1d_dim_ = 0;
};

// Inference-only form with each trunk block re-parameterized into one biased
// 3x3 convolution; branch and head layers are shared verbatim.
class FusedAcousticNet {
 public:
  explicit FusedAcousticNet(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    std::size_t in_ch = cfg_.in_channels;
    for (std::size_t s = 0; s < cfg_.stage_layers.size(); ++s)
      for (std::size_t b = 0; b < cfg_.stage_layers[s]; ++b) {
        const std::size_t stride = (b == 0) ? 2 : 1;
        trunk_.emplace_back(in_ch, cfg_.stage_widths[s], 3, stride, 1, true,
                            "stage" + std::to_string(s) + ".block" + std::to_string(b) + ".fused");
        in_ch = cfg_.stage_widths[s];
      }
    const std::size_t feat = cfg_.stage_widths.back();
    loc_head_ = std::make_unique<Dense>(feat, 2, "loc_head");
    std::size_t ch = cfg_.in_channels;
    for (std::size_t i = 0; i < cfg_.conv1d_channels.size(); ++i) {
      branch1d_.emplace_back(ch, cfg_.conv1d_channels[i], cfg_.conv1d_kernel, cfg_.conv1d_stride,
                             "branch1d.conv" + std::to_string(i));
      ch = cfg_.conv1d_channels[i];
    }
    branch_relu_.resize(branch1d_.size());
    trunk_relu_.resize(trunk_.size());
    std::size_t d_in = feat + ch;
    for (std::size_t i = 0; i < cfg_.spl_hidden.size(); ++i) {
      spl_dense_.emplace_back(d_in, cfg_.spl_hidden[i], "spl_head.dense" + std::to_string(i));
      d_in = cfg_.spl_hidden[i];
    }
    spl_dense_.emplace_back(d_in, 1, "spl_head.dense" + std::to_string(cfg_.spl_hidden.size()));
    spl_relu_.resize(cfg_.spl_hidden.size());
  }

  const ModelConfig& config() const { return cfg_; }

  ModelOutput forward(const Tensor& stack, const Tensor& raw) {
    if (stack.shape.size() != 4 || stack.dim(1) != cfg_.in_channels ||
        stack.dim(2) != cfg_.in_h || stack.dim(3) != cfg_.in_w)
      throw InvalidArgument("fused model: stack input dims do not match the config");
    if (raw.shape.size() != 3 || raw.dim(0) != stack.dim(0) || raw.dim(1) != cfg_.in_channels)
      throw InvalidArgument("fused model: raw input dims do not match the config");
    Tensor t = stack;
    for (std::size_t i = 0; i < trunk_.size(); ++i)
      t = trunk_relu_[i].forward(trunk_[i].forward(t));
    const Tensor feat = trunk_gap_.forward(t);
    ModelOutput out;
    out.loc = loc_head_->forward(feat);

    Tensor r = raw;
    for (std::size_t i = 0; i < branch1d_.size(); ++i)
      r = branch_relu_[i].forward(branch1d_[i].forward(r));
    const Tensor feat1d = branch_gap_.forward(r);

    const std::size_t fd = feat.dim(1), f1 = feat1d.dim(1), n = feat.dim(0);
    Tensor cat({n, fd + f1});
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(feat.ptr() + i * fd, feat.ptr() + (i + 1) * fd, cat.ptr() + i * (fd + f1));
      std::copy(feat1d.ptr() + i * f1, feat1d.ptr() + (i + 1) * f1,
                cat.ptr() + i * (fd + f1) + fd);
    }
    Tensor h = cat;
    for (std::size_t i = 0; i < spl_dense_.size(); ++i) {
      h = spl_dense_[i].forward(h);
      if (i + 1 < spl_dense_.size()) h = spl_relu_[i].forward(h);
    }
    out.spl = h;
    return out;
  }

  std::vector<ParamView> params() {
    std::vector<ParamView> out;
    for (auto& c : trunk_) c.collect(out);
    loc_head_->collect(out);
    for (auto& c : branch1d_) c.collect(out);
    for (auto& d : spl_dense_) d.collect(out);
    return out;
  }

  std::vector<Conv2d>& trunk() { return trunk_; }

 private:
  ModelConfig cfg_;
  std::vector<Conv2d> trunk_;
  std::vector<ReLU> trunk_relu_;
  GlobalAvgPool trunk_gap_, branch_gap_;
  std::unique_ptr<Dense> loc_head_;
  std::vector<Conv1d> branch1d_;
  std::vector<ReLU> branch_relu_;
  std::vector<Dense> spl_dense_;
  std::vector<ReLU> spl_relu_;
};

inline FusedAcousticNet fuse_model(const AcousticNet& model) {
  FusedAcousticNet fused(model.config());
  const auto& blocks = model.trunk();
  auto& convs = fused.trunk();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const FusedConv f = fuse_block(blocks[i]);
    convs[i].weight = f.weight;
    convs[i].bias = f.bias;
  }
  auto src = const_cast<AcousticNet&>(model).params();
  auto dst = fused.params();
  for (auto& d : dst) {
    if (d.name.find(".fused.") != std::string::npos) continue;
    for (const auto& s : src)
      if (s.name == d.name) {
        *d.value = *s.value;
        break;
      }
  }
  return fused;
}

// physical-unit estimates from normalized network outputs
inline LocSpl denormalize(double loc_x, double loc_y, double spl) {
  return {loc_x * kPosScale, loc_y * kPosScale, spl * kSplScale};
}

}  // namespace beamloc::nn
