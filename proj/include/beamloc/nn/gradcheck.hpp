// Central finite-difference validation of the hand-written gradients,
// bucketed by layer kind.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "beamloc/common.hpp"
#include "beamloc/nn/model.hpp"
#include "beamloc/nn/tensor.hpp"

namespace beamloc::nn {

struct GradCheckReport {
  std::map<std::string, double> max_rel_error;  // per layer kind
  double overall = 0.0;
  std::size_t checked = 0;

  bool passes(double tol) const { return checked > 0 && overall < tol; }
};

inline std::string param_kind(const std::string& name) {
  if (name.find("conv3x3") != std::string::npos || name.find("conv1x1") != std::string::npos ||
      name.find(".fused") != std::string::npos)
    return "conv2d";
  if (name.find("branch1d") != std::string::npos) return "conv1d";
  if (name.find(".bn") != std::string::npos) return "batchnorm";
  return "dense";
}

// Central differences (h = 1e-5 by default) against the analytic gradients
// already stored in the views, on up to per_kind randomly chosen parameters
// of each layer kind. `loss_fn` must re-run the forward pass and return the
// scalar objective the gradients belong to.
template <typename LossFn>
GradCheckReport check_gradients(const std::vector<ParamView>& params, LossFn&& loss_fn,
                                double h = 1e-5, std::size_t per_kind = 200,
                                std::uint64_t seed = 0) {
  struct Slot {
    std::size_t param, elem;
  };
  std::map<std::string, std::vector<Slot>> buckets;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& bucket = buckets[param_kind(params[p].name)];
    for (std::size_t e = 0; e < params[p].value->size(); ++e) bucket.push_back({p, e});
  }

  GradCheckReport report;
  std::mt19937_64 rng(seed);
  for (auto& [kind, slots] : buckets) {
    std::shuffle(slots.begin(), slots.end(), rng);
    const std::size_t n = std::min(per_kind, slots.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double& theta = (*params[slots[i].param].value)[slots[i].elem];
      const double analytic = (*params[slots[i].param].grad)[slots[i].elem];
      const double saved = theta;
      theta = saved + h;
      const double f_plus = loss_fn();
      theta = saved - h;
      const double f_minus = loss_fn();
      theta = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double rel =
          std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-8});
      worst = std::max(worst, rel);
      ++report.checked;
    }
    report.max_rel_error[kind] = worst;
    report.overall = std::max(report.overall, worst);
  }
  return report;
}

// Full-model convenience: gradients of the normalized multi-task loss in
// training mode.
inline GradCheckReport gradient_check(AcousticNet& model, const Tensor& stack, const Tensor& raw,
                                      const std::vector<LocSpl>& targets, double alpha,
                                      double h = 1e-5, std::size_t per_kind = 200,
                                      std::uint64_t seed = 0) {
  model.zero_grad();
  {
    const ModelOutput out = model.forward(stack, raw, true);
    const BatchLoss l = mtl_loss_grads(out, targets, alpha);
    model.backward(l.dloc, l.dspl);
  }
  auto loss_fn = [&]() {
    const ModelOutput out = model.forward(stack, raw, true);
    return mtl_loss_grads(out, targets, alpha).loss_norm;
  };
  return check_gradients(model.params(), loss_fn, h, per_kind, seed);
}

}  // namespace beamloc::nn
