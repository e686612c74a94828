#pragma once

#include <cstdint>
#include <string_view>

#include "hamnet/nn/model.hpp"

namespace hamnet::nn {

enum class LossKind { Bce, Mse };

std::string_view to_string(LossKind kind) noexcept;
LossKind parse_loss_kind(std::string_view name);

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d pred
};

inline constexpr double kBceClamp = 1e-7;

/// -mean(t log p + (1-t) log(1-p)) with p clamped to [1e-7, 1-1e-7]; the
/// gradient is that of the clamped expression (zero where the clamp is active).
LossResult bce_loss(const Tensor& pred, const Tensor& target);

/// mean((p - t)^2)
LossResult mse_loss(const Tensor& pred, const Tensor& target);

LossResult compute_loss(LossKind kind, const Tensor& pred, const Tensor& target);

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  ParamSet m;
  ParamSet v;
  std::uint64_t step = 0;

  static AdamState for_params(const ParamSet& params);
};

/// One bias-corrected Adam update.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, const AdamConfig& config);

}  // namespace hamnet::nn
