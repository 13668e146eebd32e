// Training loop: seeded init, seeded epoch shuffles, Adam updates on the
// normalized multi-task loss, per-epoch validation, best-MDE checkpointing,
// and the history CSV.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "beamloc/common.hpp"
#include "beamloc/nn/adam.hpp"
#include "beamloc/nn/checkpoint.hpp"
#include "beamloc/nn/data.hpp"
#include "beamloc/nn/model.hpp"

namespace beamloc::nn {

struct TrainConfig {
  double alpha = 10.0;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch = 8;
  int epochs = 150;
  std::uint64_t seed = 0;
  std::string checkpoint_path;  // best-validation-MDE checkpoint; empty = skip
  std::string history_path;     // per-epoch CSV; empty = skip
  bool verbose = false;

  void validate() const {
    if (alpha <= 0.0) throw InvalidArgument("train: alpha must be positive");
    if (lr <= 0.0) throw InvalidArgument("train: lr must be positive");
    if (batch < 1) throw InvalidArgument("train: batch must be >= 1");
    if (epochs < 1) throw InvalidArgument("train: epochs must be >= 1");
  }
};

struct EpochStats {
  int epoch = 0;          // 1-based
  double train_loss = 0;  // physical-unit loss, mean per sample
  double val_loss = 0;
  double val_mde = 0;
  double val_mae_spl = 0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_val_mde = std::numeric_limits<double>::infinity();
};

struct EvalStats {
  double loss_paper = 0.0;
  double mde = 0.0;
  double mae_spl = 0.0;
};

// Physical-unit loss and error means over a set, eval mode, batched.
inline EvalStats evaluate_set(AcousticNet& model, const TrainingSet& set, double alpha,
                              int batch) {
  EvalStats stats;
  if (set.size() == 0) return stats;
  Tensor stack, raw;
  std::vector<LocSpl> targets;
  std::vector<std::size_t> ids;
  for (std::size_t start = 0; start < set.size(); start += static_cast<std::size_t>(batch)) {
    const std::size_t stop = std::min(set.size(), start + static_cast<std::size_t>(batch));
    ids.resize(stop - start);
    std::iota(ids.begin(), ids.end(), start);
    fill_batch(set, ids, stack, raw, targets);
    const ModelOutput out = model.forward(stack, raw, false);
    const BatchLoss l = mtl_loss_grads(out, targets, alpha);
    stats.loss_paper += l.loss_paper * static_cast<double>(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const LocSpl pred =
          denormalize(out.loc.data[2 * i], out.loc.data[2 * i + 1], out.spl.data[i]);
      stats.mde += std::hypot(pred.x - targets[i].x, pred.y - targets[i].y);
      stats.mae_spl += std::abs(pred.spl - targets[i].spl);
    }
  }
  const double inv = 1.0 / static_cast<double>(set.size());
  stats.loss_paper *= inv;
  stats.mde *= inv;
  stats.mae_spl *= inv;
  return stats;
}

inline void save_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
  auto os = io::open_out(path, false);
  os << "epoch,train_loss,val_loss,val_mde,val_mae_spl\n";
  char line[160];
  for (const auto& e : history) {
    std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g,%.9g\n", e.epoch, e.train_loss,
                  e.val_loss, e.val_mde, e.val_mae_spl);
    os << line;
  }
  if (!os) throw IoError("failed writing " + path);
}

inline TrainResult train_model(AcousticNet& model, const TrainingSet& train_set,
                               const TrainingSet& val_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.size() == 0) throw InvalidArgument("train: empty training split");

  model.init_he(cfg.seed);
  Adam opt(model.params(), {cfg.lr, cfg.beta1, cfg.beta2, cfg.eps});

  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  Tensor stack, raw;
  std::vector<LocSpl> targets;
  std::vector<std::size_t> ids;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::mt19937_64 rng(cfg.seed * 0x100000001b3ULL + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    double train_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      ids.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                 order.begin() + static_cast<std::ptrdiff_t>(stop));
      fill_batch(train_set, ids, stack, raw, targets);
      const ModelOutput out = model.forward(stack, raw, true);
      const BatchLoss l = mtl_loss_grads(out, targets, cfg.alpha);
      model.zero_grad();
      model.backward(l.dloc, l.dspl);
      opt.step();
      train_loss += l.loss_paper * static_cast<double>(ids.size());
    }
    train_loss /= static_cast<double>(train_set.size());

    const EvalStats val = evaluate_set(model, val_set, cfg.alpha, cfg.batch);
    result.history.push_back({epoch, train_loss, val.loss_paper, val.mde, val.mae_spl});
    if (cfg.verbose)
      std::fprintf(stderr, "epoch %d train_loss %.6g val_loss %.6g val_mde %.4g val_mae %.4g\n",
                   epoch, train_loss, val.loss_paper, val.mde, val.mae_spl);

    if (val_set.size() > 0 && val.mde < result.best_val_mde) {
      result.best_val_mde = val.mde;
      result.best_epoch = epoch;
      if (!cfg.checkpoint_path.empty()) {
        nlohmann::json metrics{{"val_loss", val.loss_paper},
                               {"val_mde", val.mde},
                               {"val_mae_spl", val.mae_spl}};
        save_model_checkpoint(cfg.checkpoint_path, model, epoch, metrics);
      }
    }
  }
  if (val_set.size() == 0) {
    result.best_epoch = cfg.epochs;
    result.best_val_mde = 0.0;
    if (!cfg.checkpoint_path.empty())
      save_model_checkpoint(cfg.checkpoint_path, model, cfg.epochs, nlohmann::json::object());
  }
  if (!cfg.history_path.empty()) save_history_csv(cfg.history_path, result.history);
  return result;
}

}  // namespace beamloc::nn
