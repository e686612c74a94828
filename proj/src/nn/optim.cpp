#include "hamnet/nn/optim.hpp"

#include <algorithm>
#include <cmath>

#include "hamnet/error.hpp"

namespace hamnet::nn {

std::string_view to_string(LossKind kind) noexcept { return kind == LossKind::Bce ? "bce" : "mse"; }

LossKind parse_loss_kind(std::string_view name) {
  if (name == "bce") return LossKind::Bce;
  if (name == "mse") return LossKind::Mse;
  fail(ErrorKind::Config, "unknown loss '" + std::string(name) + "' (expected bce or mse)");
}

namespace {

void check_same_shape(const Tensor& pred, const Tensor& target, const char* what) {
  if (pred.shape() != target.shape()) {
    fail(ErrorKind::Parameter, std::string(what) + " shape mismatch: pred " + shape_string(pred.shape()) +
                                   " vs target " + shape_string(target.shape()));
  }
  require(pred.size() > 0, std::string(what) + " of empty tensors");
}

}  // namespace

LossResult bce_loss(const Tensor& pred, const Tensor& target) {
  check_same_shape(pred, target, "bce");
  const double n = static_cast<double>(pred.size());
  LossResult r{0.0, Tensor(pred.shape())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred[i], kBceClamp, 1.0 - kBceClamp);
    const double t = target[i];
    r.loss -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    const bool clamped = pred[i] < kBceClamp || pred[i] > 1.0 - kBceClamp;
    r.grad[i] = clamped ? 0.0 : (-t / p + (1.0 - t) / (1.0 - p)) / n;
  }
  r.loss /= n;
  return r;
}

LossResult mse_loss(const Tensor& pred, const Tensor& target) {
  check_same_shape(pred, target, "mse");
  const double n = static_cast<double>(pred.size());
  LossResult r{0.0, Tensor(pred.shape())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    r.loss += d * d;
    r.grad[i] = 2.0 * d / n;
  }
  r.loss /= n;
  return r;
}

LossResult compute_loss(LossKind kind, const Tensor& pred, const Tensor& target) {
  return kind == LossKind::Bce ? bce_loss(pred, target) : mse_loss(pred, target);
}

AdamState AdamState::for_params(const ParamSet& params) { return {zeros_like(params), zeros_like(params), 0}; }

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, const AdamConfig& config) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    fail(ErrorKind::Parameter, "adam_step: gradient/state layout does not mirror the parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t l = 0; l < params.size(); ++l) {
    for (std::size_t s = 0; s < params[l].size(); ++s) {
      auto& p = params[l][s];
      const auto& g = grads[l][s];
      auto& m = state.m[l][s];
      auto& v = state.v[l][s];
      if (g.shape() != p.shape() || m.shape() != p.shape() || v.shape() != p.shape()) {
        fail(ErrorKind::Parameter, "adam_step: shape mismatch in layer " + std::to_string(l));
      }
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        p[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
      }
    }
  }
}

}  // namespace hamnet::nn
