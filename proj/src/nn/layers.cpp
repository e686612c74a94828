#include "hamnet/nn/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "hamnet/error.hpp"

namespace hamnet::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using ConstMapVec = Eigen::Map<const Eigen::VectorXd>;
using MapVec = Eigen::Map<Eigen::VectorXd>;

void check_conv_shapes(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (input.rank() != 3) fail(ErrorKind::Parameter, "conv2d input must be [h,w,c], got " + shape_string(input.shape()));
  if (weights.rank() != 4 || weights.dim(2) != input.dim(2)) {
    fail(ErrorKind::Parameter, "conv2d weights " + shape_string(weights.shape()) + " do not match input " +
                                   shape_string(input.shape()));
  }
  if (weights.dim(0) % 2 == 0 || weights.dim(1) % 2 == 0) {
    fail(ErrorKind::Parameter, "conv2d kernel dims must be odd for same padding");
  }
  if (bias.rank() != 1 || bias.dim(0) != weights.dim(3)) {
    fail(ErrorKind::Parameter, "conv2d bias " + shape_string(bias.shape()) + " does not match filters");
  }
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, ConvCache* cache) {
  check_conv_shapes(input, weights, bias);
  const std::size_t h = input.dim(0), w = input.dim(1), c = input.dim(2);
  const std::size_t kh = weights.dim(0), kw = weights.dim(1), filters = weights.dim(3);
  const std::size_t ph = kh / 2, pw = kw / 2;
  const std::size_t k = kh * kw * c;

  thread_local std::vector<double> scratch;
  std::vector<double>& columns = cache ? cache->columns : scratch;
  columns.assign(h * w * k, 0.0);
  const double* in = input.data();
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double* row = columns.data() + (y * w + x) * k;
      for (std::size_t ky = 0; ky < kh; ++ky) {
        const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(ph);
        if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
        for (std::size_t kx = 0; kx < kw; ++kx) {
          const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + kx) - static_cast<std::ptrdiff_t>(pw);
          if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
          const double* src = in + (static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)) * c;
          std::copy(src, src + c, row + (ky * kw + kx) * c);
        }
      }
    }
  }

  Tensor out({h, w, filters});
  ConstMapMat cols(columns.data(), static_cast<Eigen::Index>(h * w), static_cast<Eigen::Index>(k));
  ConstMapMat wmat(weights.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(filters));
  MapMat omat(out.data(), static_cast<Eigen::Index>(h * w), static_cast<Eigen::Index>(filters));
  omat.noalias() = cols * wmat;
  omat.rowwise() += ConstMapVec(bias.data(), static_cast<Eigen::Index>(filters)).transpose();

  if (cache) cache->input_shape = input.shape();
  return out;
}

void conv2d_backward(const Tensor& grad_output, const ConvCache& cache, const Tensor& weights, Tensor* grad_input,
                     Tensor& grad_weights, Tensor& grad_bias) {
  const std::size_t h = cache.input_shape.at(0), w = cache.input_shape.at(1), c = cache.input_shape.at(2);
  const std::size_t kh = weights.dim(0), kw = weights.dim(1), filters = weights.dim(3);
  const std::size_t ph = kh / 2, pw = kw / 2;
  const std::size_t k = kh * kw * c;
  if (grad_output.shape() != Shape{h, w, filters}) {
    fail(ErrorKind::Parameter, "conv2d grad_output " + shape_string(grad_output.shape()) + " does not match forward");
  }
  const auto hw = static_cast<Eigen::Index>(h * w);
  ConstMapMat cols(cache.columns.data(), hw, static_cast<Eigen::Index>(k));
  ConstMapMat gout(grad_output.data(), hw, static_cast<Eigen::Index>(filters));
  MapMat gw(grad_weights.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(filters));
  gw.noalias() += cols.transpose() * gout;
  MapVec(grad_bias.data(), static_cast<Eigen::Index>(filters)) += gout.colwise().sum().transpose();

  if (!grad_input) return;
  ConstMapMat wmat(weights.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(filters));
  thread_local RowMat gcols;
  gcols.resize(hw, static_cast<Eigen::Index>(k));
  gcols.noalias() = gout * wmat.transpose();
  *grad_input = Tensor(cache.input_shape);
  double* gi = grad_input->data();
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double* row = gcols.data() + (y * w + x) * k;
      for (std::size_t ky = 0; ky < kh; ++ky) {
        const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(ph);
        if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
        for (std::size_t kx = 0; kx < kw; ++kx) {
          const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + kx) - static_cast<std::ptrdiff_t>(pw);
          if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
          double* dst = gi + (static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)) * c;
          const double* src = row + (ky * kw + kx) * c;
          for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += src[ch];
        }
      }
    }
  }
}

Tensor maxpool2d_forward(const Tensor& input, PoolCache* cache) {
  if (input.rank() != 3 || input.dim(0) < 2 || input.dim(1) < 2) {
    fail(ErrorKind::Parameter, "maxpool2d needs [h>=2, w>=2, c] input, got " + shape_string(input.shape()));
  }
  const std::size_t h = input.dim(0), w = input.dim(1), c = input.dim(2);
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor out({oh, ow, c});
  std::vector<std::size_t> argmax(out.size());
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        // row-major scan with strict '>' keeps the earliest position on ties
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = ((2 * y + dy) * w + (2 * x + dx)) * c + ch;
            if (input[idx] > best) {
              best = input[idx];
              best_idx = idx;
            }
          }
        }
        const std::size_t o = (y * ow + x) * c + ch;
        out[o] = best;
        argmax[o] = best_idx;
      }
    }
  }
  if (cache) {
    cache->input_shape = input.shape();
    cache->argmax = std::move(argmax);
  }
  return out;
}

Tensor maxpool2d_backward(const Tensor& grad_output, const PoolCache& cache) {
  if (grad_output.size() != cache.argmax.size()) {
    fail(ErrorKind::Parameter, "maxpool2d grad_output " + shape_string(grad_output.shape()) + " does not match forward");
  }
  Tensor grad_input(cache.input_shape);
  for (std::size_t o = 0; o < grad_output.size(); ++o) grad_input[cache.argmax[o]] += grad_output[o];
  return grad_input;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, DenseCache* cache) {
  if (input.rank() != 1 || weights.rank() != 2 || weights.dim(0) != input.dim(0) || bias.rank() != 1 ||
      bias.dim(0) != weights.dim(1)) {
    fail(ErrorKind::Parameter, "dense shapes do not compose: input " + shape_string(input.shape()) + ", weights " +
                                   shape_string(weights.shape()) + ", bias " + shape_string(bias.shape()));
  }
  const auto in = static_cast<Eigen::Index>(weights.dim(0));
  const auto units = static_cast<Eigen::Index>(weights.dim(1));
  Tensor out({weights.dim(1)});
  ConstMapMat wmat(weights.data(), in, units);
  MapVec(out.data(), units).noalias() = wmat.transpose() * ConstMapVec(input.data(), in);
  MapVec(out.data(), units) += ConstMapVec(bias.data(), units);
  if (cache) cache->input = input;
  return out;
}

void dense_backward(const Tensor& grad_output, const DenseCache& cache, const Tensor& weights, Tensor* grad_input,
                    Tensor& grad_weights, Tensor& grad_bias) {
  const auto in = static_cast<Eigen::Index>(weights.dim(0));
  const auto units = static_cast<Eigen::Index>(weights.dim(1));
  if (grad_output.rank() != 1 || static_cast<Eigen::Index>(grad_output.dim(0)) != units) {
    fail(ErrorKind::Parameter, "dense grad_output " + shape_string(grad_output.shape()) + " does not match forward");
  }
  ConstMapVec gout(grad_output.data(), units);
  ConstMapVec x(cache.input.data(), in);
  MapMat(grad_weights.data(), in, units).noalias() += x * gout.transpose();
  MapVec(grad_bias.data(), units) += gout;
  if (grad_input) {
    *grad_input = Tensor({weights.dim(0)});
    ConstMapMat wmat(weights.data(), in, units);
    MapVec(grad_input->data(), in).noalias() = wmat * gout;
  }
}

std::string_view to_string(ActivationKind kind) noexcept {
  switch (kind) {
    case ActivationKind::Relu: return "relu";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Softmax: return "softmax";
  }
  return "relu";
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor activation_forward(ActivationKind kind, const Tensor& input) {
  Tensor out(input.shape());
  switch (kind) {
    case ActivationKind::Relu:
      for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > 0.0 ? input[i] : 0.0;
      break;
    case ActivationKind::Sigmoid:
      for (std::size_t i = 0; i < input.size(); ++i) out[i] = sigmoid(input[i]);
      break;
    case ActivationKind::Softmax: {
      require(input.rank() >= 1 && input.size() > 0, "softmax needs a non-empty tensor");
      const std::size_t n = input.shape().back();
      for (std::size_t base = 0; base < input.size(); base += n) {
        double mx = input[base];
        for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, input[base + i]);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += (out[base + i] = std::exp(input[base + i] - mx));
        for (std::size_t i = 0; i < n; ++i) out[base + i] /= sum;
      }
      break;
    }
  }
  return out;
}

Tensor activation_backward(ActivationKind kind, const Tensor& grad_output, const Tensor& output) {
  if (grad_output.shape() != output.shape()) {
    fail(ErrorKind::Parameter, "activation grad_output " + shape_string(grad_output.shape()) + " does not match output");
  }
  Tensor grad(output.shape());
  switch (kind) {
    case ActivationKind::Relu:
      for (std::size_t i = 0; i < output.size(); ++i) grad[i] = output[i] > 0.0 ? grad_output[i] : 0.0;
      break;
    case ActivationKind::Sigmoid:
      for (std::size_t i = 0; i < output.size(); ++i) grad[i] = grad_output[i] * output[i] * (1.0 - output[i]);
      break;
    case ActivationKind::Softmax: {
      const std::size_t n = output.shape().back();
      for (std::size_t base = 0; base < output.size(); base += n) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += grad_output[base + i] * output[base + i];
        for (std::size_t i = 0; i < n; ++i) grad[base + i] = output[base + i] * (grad_output[base + i] - dot);
      }
      break;
    }
  }
  return grad;
}

}  // namespace hamnet::nn
