#pragma once

// Central finite-difference oracles for the nn layer kernels. Each check
// builds a scalar objective L = sum(r * f(x)) with a random projection r,
// gets dL/dx from the layer's backward pass, and compares it with
// (L(x + d) - L(x - d)) / 2d elementwise at d = 1e-5.
//
// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-3):
// components whose true gradient is below 1e-3 are judged on absolute error.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hamnet/nn/layers.hpp"
#include "hamnet/nn/model.hpp"
#include "hamnet/nn/optim.hpp"
#include "hamnet/rng.hpp"

namespace hamnet::test {

inline constexpr double kFdStep = 1e-5;
inline constexpr double kGradFloor = 1e-3;

struct GradCheck {
  std::string what;
  double max_rel_error = 0.0;
  std::size_t compared = 0;
};

inline double rel_error(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), kGradFloor});
}

inline nn::Tensor random_tensor(const nn::Shape& shape, Rng& rng, double scale = 1.0) {
  nn::Tensor t(shape);
  for (auto& v : t.values()) v = scale * rng.uniform(-1.0, 1.0);
  return t;
}

/// Values at least `gap` apart from one another and from zero, randomly
/// signed, so relu kinks and maxpool ties stay out of reach of the step.
inline nn::Tensor separated_tensor(const nn::Shape& shape, Rng& rng, double gap = 1e-2) {
  nn::Tensor t(shape);
  const std::size_t n = t.size();
  std::vector<double> magnitudes(n);
  for (std::size_t i = 0; i < n; ++i) magnitudes[i] = gap * static_cast<double>(i + 1);
  for (std::size_t i = n; i > 1; --i) std::swap(magnitudes[i - 1], magnitudes[rng.below(i)]);
  for (std::size_t i = 0; i < n; ++i) t[i] = (rng.below(2) ? 1.0 : -1.0) * magnitudes[i];
  return t;
}

inline double project(const nn::Tensor& out, const nn::Tensor& r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += out[i] * r[i];
  return acc;
}

/// Compares analytic with numeric gradients of objective() w.r.t. every entry of x.
inline void compare(GradCheck& check, nn::Tensor& x, const nn::Tensor& analytic,
                    const std::function<double()>& objective) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + kFdStep;
    const double up = objective();
    x[i] = keep - kFdStep;
    const double down = objective();
    x[i] = keep;
    const double numeric = (up - down) / (2 * kFdStep);
    check.max_rel_error = std::max(check.max_rel_error, rel_error(analytic[i], numeric));
    ++check.compared;
  }
}

inline GradCheck check_conv2d(Rng& rng, std::size_t h, std::size_t w, std::size_t c_in, std::size_t filters,
                              std::size_t kh, std::size_t kw) {
  GradCheck check{"conv2d " + std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c_in) + " k" +
                  std::to_string(kh) + "x" + std::to_string(kw) + " f" + std::to_string(filters)};
  auto x = random_tensor({h, w, c_in}, rng);
  auto wt = random_tensor({kh, kw, c_in, filters}, rng, 0.5);
  auto b = random_tensor({filters}, rng, 0.5);
  const auto r = random_tensor({h, w, filters}, rng);
  nn::ConvCache cache;
  nn::conv2d_forward(x, wt, b, &cache);
  nn::Tensor gx(x.shape()), gw(wt.shape()), gb(b.shape());
  nn::conv2d_backward(r, cache, wt, &gx, gw, gb);
  auto objective = [&] { return project(nn::conv2d_forward(x, wt, b, nullptr), r); };
  compare(check, x, gx, objective);
  compare(check, wt, gw, objective);
  compare(check, b, gb, objective);
  return check;
}

inline GradCheck check_maxpool(Rng& rng, std::size_t h, std::size_t w, std::size_t c) {
  GradCheck check{"maxpool " + std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c)};
  auto x = separated_tensor({h, w, c}, rng);
  nn::PoolCache cache;
  const auto out = nn::maxpool2d_forward(x, &cache);
  const auto r = random_tensor(out.shape(), rng);
  const auto gx = nn::maxpool2d_backward(r, cache);
  compare(check, x, gx, [&] { return project(nn::maxpool2d_forward(x, nullptr), r); });
  return check;
}

inline GradCheck check_dense(Rng& rng, std::size_t in, std::size_t units) {
  GradCheck check{"dense " + std::to_string(in) + "->" + std::to_string(units)};
  auto x = random_tensor({in}, rng);
  auto wt = random_tensor({in, units}, rng, 0.5);
  auto b = random_tensor({units}, rng, 0.5);
  const auto r = random_tensor({units}, rng);
  nn::DenseCache cache;
  nn::dense_forward(x, wt, b, &cache);
  nn::Tensor gx(x.shape()), gw(wt.shape()), gb(b.shape());
  nn::dense_backward(r, cache, wt, &gx, gw, gb);
  auto objective = [&] { return project(nn::dense_forward(x, wt, b, nullptr), r); };
  compare(check, x, gx, objective);
  compare(check, wt, gw, objective);
  compare(check, b, gb, objective);
  return check;
}

inline GradCheck check_activation(Rng& rng, nn::ActivationKind kind, const nn::Shape& shape) {
  GradCheck check{std::string(nn::to_string(kind)) + " " + nn::shape_string(shape)};
  auto x = kind == nn::ActivationKind::Relu ? separated_tensor(shape, rng) : random_tensor(shape, rng, 3.0);
  const auto r = random_tensor(shape, rng);
  const auto out = nn::activation_forward(kind, x);
  const auto gx = nn::activation_backward(kind, r, out);
  compare(check, x, gx, [&] { return project(nn::activation_forward(kind, x), r); });
  return check;
}

inline GradCheck check_loss(Rng& rng, nn::LossKind kind, std::size_t n) {
  GradCheck check{std::string(nn::to_string(kind)) + " n=" + std::to_string(n)};
  nn::Tensor pred({n}), target({n});
  for (std::size_t i = 0; i < n; ++i) {
    pred[i] = rng.uniform(0.05, 0.95);
    target[i] = kind == nn::LossKind::Bce ? static_cast<double>(rng.below(2)) : rng.uniform(0.0, 1.0);
  }
  const auto result = nn::compute_loss(kind, pred, target);
  compare(check, pred, result.grad, [&] { return nn::compute_loss(kind, pred, target).loss; });
  return check;
}

/// End-to-end check through a whole small model, parameters included.
inline GradCheck check_model(Rng& rng, nn::Model& model, nn::LossKind loss) {
  GradCheck check{"model " + nn::shape_string(model.input_shape()) + " -> " +
                  nn::shape_string(model.output_shape())};
  model.initialize(rng.next_u64());
  for (auto& layer : model.params()) {
    for (auto& t : layer) {
      for (auto& v : t.values()) v += 0.05 * rng.uniform(-1.0, 1.0);  // nonzero biases too
    }
  }
  auto x = random_tensor(model.input_shape(), rng);
  nn::Tensor target(model.output_shape());
  for (auto& v : target.values()) v = loss == nn::LossKind::Bce ? static_cast<double>(rng.below(2)) : rng.uniform();
  if (model.output_shape().size() == 1 && model.output_shape()[0] > 1 && loss == nn::LossKind::Bce) {
    target.fill(0.0);
    target[rng.below(target.size())] = 1.0;
  }
  nn::ForwardTrace trace;
  const auto out = model.forward(x, trace);
  const auto l = nn::compute_loss(loss, out, target);
  auto grads = nn::zeros_like(model.params());
  model.backward(trace, l.grad, grads);
  auto objective = [&] { return nn::compute_loss(loss, model.predict(x), target).loss; };
  for (std::size_t i = 0; i < grads.size(); ++i) {
    for (std::size_t s = 0; s < grads[i].size(); ++s) compare(check, model.params()[i][s], grads[i][s], objective);
  }
  return check;
}

}  // namespace hamnet::test
