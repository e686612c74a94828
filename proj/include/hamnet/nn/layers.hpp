#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "hamnet/nn/tensor.hpp"

namespace hamnet::nn {

// Layer kernels. Forward functions optionally fill a cache; backward
// functions consume it and *accumulate* parameter gradients, so a batch
// can be summed example by example.

// ---- Conv2D: stride 1, zero "same" padding, odd kernels --------------------
// weights [kh, kw, c_in, filters], bias [filters]

struct ConvCache {
  Shape input_shape;
  std::vector<double> columns;  // im2col matrix [h*w, kh*kw*c_in]
};

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, ConvCache* cache);

/// grad_input may be null when the input gradient is not needed.
void conv2d_backward(const Tensor& grad_output, const ConvCache& cache, const Tensor& weights,
                     Tensor* grad_input, Tensor& grad_weights, Tensor& grad_bias);

// ---- MaxPool2D: 2x2 windows, stride 2, odd trailing row/column dropped -----

struct PoolCache {
  Shape input_shape;
  std::vector<std::size_t> argmax;  // flat input index per output element
};

Tensor maxpool2d_forward(const Tensor& input, PoolCache* cache);
Tensor maxpool2d_backward(const Tensor& grad_output, const PoolCache& cache);

// ---- Dense: y = W^T x + b, weights [in, units] -----------------------------

struct DenseCache {
  Tensor input;
};

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, DenseCache* cache);
void dense_backward(const Tensor& grad_output, const DenseCache& cache, const Tensor& weights,
                    Tensor* grad_input, Tensor& grad_weights, Tensor& grad_bias);

// ---- activations -----------------------------------------------------------

enum class ActivationKind { Relu, Sigmoid, Softmax };

std::string_view to_string(ActivationKind kind) noexcept;

/// Numerically stable logistic function.
double sigmoid(double x) noexcept;

/// Softmax is taken over the last axis.
Tensor activation_forward(ActivationKind kind, const Tensor& input);

/// Uses the forward *output* (relu/sigmoid/softmax derivatives are all
/// expressible through it).
Tensor activation_backward(ActivationKind kind, const Tensor& grad_output, const Tensor& output);

}  // namespace hamnet::nn
