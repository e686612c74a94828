#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hamnet/nn/layers.hpp"
#include "hamnet/nn/tensor.hpp"

namespace hamnet::nn {

enum class LayerKind { Conv2D, MaxPool2D, Flatten, Dense, Activation };

std::string_view to_string(LayerKind kind) noexcept;

struct LayerSpec {
  LayerKind kind = LayerKind::Flatten;
  std::size_t filters = 0;   // Conv2D
  std::size_t kernel_h = 0;  // Conv2D
  std::size_t kernel_w = 0;  // Conv2D
  std::size_t units = 0;     // Dense
  ActivationKind activation = ActivationKind::Relu;

  static LayerSpec conv2d(std::size_t filters, std::size_t kernel_h = 3, std::size_t kernel_w = 3);
  static LayerSpec maxpool2d();
  static LayerSpec flatten();
  static LayerSpec dense(std::size_t units);
  static LayerSpec act(ActivationKind kind);

  nlohmann::ordered_json to_json() const;
  static LayerSpec from_json(const nlohmann::json& j);

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Trainable tensors, grouped per layer (weights then bias; empty for
/// parameter-free layers). Gradients and Adam moments share this layout.
using ParamSet = std::vector<std::vector<Tensor>>;

ParamSet zeros_like(const ParamSet& params);

/// Per-layer state a backward pass needs.
struct LayerTrace {
  std::variant<std::monostate, ConvCache, PoolCache, DenseCache> cache;
  Shape input_shape;
  Tensor output;  // kept for activations
};

struct ForwardTrace {
  std::vector<LayerTrace> layers;
};

class Model {
 public:
  /// Validates that the stack composes; parameters start at zero.
  Model(Shape input_shape, std::vector<LayerSpec> layers);

  const Shape& input_shape() const noexcept { return input_shape_; }
  const Shape& output_shape() const noexcept { return shapes_.back(); }
  /// Output shape of layer i.
  const Shape& layer_output_shape(std::size_t i) const { return shapes_.at(i + 1); }
  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }

  ParamSet& params() noexcept { return params_; }
  const ParamSet& params() const noexcept { return params_; }
  std::size_t parameter_count() const noexcept;
  std::size_t layer_parameter_count(std::size_t i) const;
  /// "layer<i>.weights" / "layer<i>.bias"
  static std::string param_name(std::size_t layer, std::size_t slot);

  /// He-uniform for layers feeding a relu, Glorot-uniform otherwise; zero biases.
  void initialize(std::uint64_t seed);

  Tensor predict(const Tensor& input) const;
  Tensor forward(const Tensor& input, ForwardTrace& trace) const;
  /// Accumulates parameter gradients into grads (same layout as params()).
  void backward(const ForwardTrace& trace, const Tensor& grad_output, ParamSet& grads) const;

 private:
  Tensor run(const Tensor& input, ForwardTrace* trace) const;

  Shape input_shape_;
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;  // shapes_[0] = input, shapes_[i+1] = output of layer i
  ParamSet params_;
};

/// conv32-relu-pool, conv64-relu-pool, conv128-relu-pool, flatten, dense128-relu,
/// then dense1-sigmoid (n_outputs == 1) or denseN-softmax.
Model build_classifier(const Shape& input_shape, std::size_t n_outputs = 1);

/// Four 3x3 same-padded conv layers (16, 32, 16, 1) with relu between and a
/// sigmoid mask at the end; output shape equals input shape.
Model build_denoiser(const Shape& input_shape);

}  // namespace hamnet::nn
