#include "hamnet/nn/model.hpp"

#include <cmath>

#include "hamnet/error.hpp"
#include "hamnet/rng.hpp"

namespace hamnet::nn {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::Conv2D: return "conv2d";
    case LayerKind::MaxPool2D: return "maxpool2d";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Dense: return "dense";
    case LayerKind::Activation: return "activation";
  }
  return "flatten";
}

LayerSpec LayerSpec::conv2d(std::size_t filters, std::size_t kernel_h, std::size_t kernel_w) {
  LayerSpec s;
  s.kind = LayerKind::Conv2D;
  s.filters = filters;
  s.kernel_h = kernel_h;
  s.kernel_w = kernel_w;
  return s;
}

LayerSpec LayerSpec::maxpool2d() {
  LayerSpec s;
  s.kind = LayerKind::MaxPool2D;
  return s;
}

LayerSpec LayerSpec::flatten() { return LayerSpec{}; }

LayerSpec LayerSpec::dense(std::size_t units) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.units = units;
  return s;
}

LayerSpec LayerSpec::act(ActivationKind kind) {
  LayerSpec s;
  s.kind = LayerKind::Activation;
  s.activation = kind;
  return s;
}

ordered_json LayerSpec::to_json() const {
  ordered_json j;
  j["kind"] = std::string(to_string(kind));
  switch (kind) {
    case LayerKind::Conv2D:
      j["filters"] = filters;
      j["kernel"] = {kernel_h, kernel_w};
      j["stride"] = 1;
      j["padding"] = "same";
      break;
    case LayerKind::MaxPool2D:
      j["pool"] = {2, 2};
      j["stride"] = 2;
      break;
    case LayerKind::Dense:
      j["units"] = units;
      break;
    case LayerKind::Activation:
      j["function"] = std::string(to_string(activation));
      break;
    case LayerKind::Flatten:
      break;
  }
  return j;
}

LayerSpec LayerSpec::from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "conv2d") {
    const auto k = j.at("kernel");
    if (j.value("stride", 1) != 1 || j.value("padding", std::string("same")) != "same") {
      fail(ErrorKind::Format, "conv2d layers must use stride 1 and same padding");
    }
    return conv2d(j.at("filters").get<std::size_t>(), k.at(0).get<std::size_t>(), k.at(1).get<std::size_t>());
  }
  if (kind == "maxpool2d") return maxpool2d();
  if (kind == "flatten") return flatten();
  if (kind == "dense") return dense(j.at("units").get<std::size_t>());
  if (kind == "activation") {
    const auto fn = j.at("function").get<std::string>();
    for (auto a : {ActivationKind::Relu, ActivationKind::Sigmoid, ActivationKind::Softmax}) {
      if (fn == to_string(a)) return act(a);
    }
    fail(ErrorKind::Format, "unknown activation '" + fn + "'");
  }
  fail(ErrorKind::Format, "unknown layer kind '" + kind + "'");
}

ParamSet zeros_like(const ParamSet& params) {
  ParamSet out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (const auto& t : params[i]) out[i].push_back(nn::zeros_like(t));
  }
  return out;
}

Model::Model(Shape input_shape, std::vector<LayerSpec> layers)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
  if (input_shape_.empty() || shape_size(input_shape_) == 0) {
    fail(ErrorKind::Parameter, "model input shape " + shape_string(input_shape_) + " is empty");
  }
  shapes_.push_back(input_shape_);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& spec = layers_[i];
    const Shape& in = shapes_.back();
    auto bad = [&](const std::string& why) {
      fail(ErrorKind::Parameter, "layer " + std::to_string(i) + " (" + std::string(to_string(spec.kind)) +
                                     "): " + why + "; input shape " + shape_string(in));
    };
    std::vector<Tensor> p;
    Shape out;
    switch (spec.kind) {
      case LayerKind::Conv2D:
        if (in.size() != 3) bad("expects a [h,w,c] input");
        if (spec.filters == 0) bad("needs at least one filter");
        if (spec.kernel_h % 2 == 0 || spec.kernel_w % 2 == 0) bad("kernel dims must be odd");
        p.emplace_back(Shape{spec.kernel_h, spec.kernel_w, in[2], spec.filters});
        p.emplace_back(Shape{spec.filters});
        out = {in[0], in[1], spec.filters};
        break;
      case LayerKind::MaxPool2D:
        if (in.size() != 3 || in[0] < 2 || in[1] < 2) bad("expects a [h>=2,w>=2,c] input");
        out = {in[0] / 2, in[1] / 2, in[2]};
        break;
      case LayerKind::Flatten:
        out = {shape_size(in)};
        break;
      case LayerKind::Dense:
        if (in.size() != 1) bad("expects a rank-1 input (insert flatten)");
        if (spec.units == 0) bad("units must be positive");
        p.emplace_back(Shape{in[0], spec.units});
        p.emplace_back(Shape{spec.units});
        out = {spec.units};
        break;
      case LayerKind::Activation:
        out = in;
        break;
    }
    params_.push_back(std::move(p));
    shapes_.push_back(std::move(out));
  }
}

std::size_t Model::layer_parameter_count(std::size_t i) const {
  std::size_t n = 0;
  for (const auto& t : params_.at(i)) n += t.size();
  return n;
}

std::size_t Model::parameter_count() const noexcept {
  std::size_t n = 0;
  for (std::size_t i = 0; i < params_.size(); ++i) n += layer_parameter_count(i);
  return n;
}

std::string Model::param_name(std::size_t layer, std::size_t slot) {
  return "layer" + std::to_string(layer) + (slot == 0 ? ".weights" : ".bias");
}

void Model::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& spec = layers_[i];
    if (spec.kind != LayerKind::Conv2D && spec.kind != LayerKind::Dense) continue;
    // the nearest following activation decides the scheme
    bool feeds_relu = false;
    for (std::size_t j = i + 1; j < layers_.size(); ++j) {
      if (layers_[j].kind == LayerKind::Activation) {
        feeds_relu = layers_[j].activation == ActivationKind::Relu;
        break;
      }
      if (layers_[j].kind == LayerKind::Conv2D || layers_[j].kind == LayerKind::Dense) break;
    }
    auto& weights = params_[i][0];
    double fan_in, fan_out;
    if (spec.kind == LayerKind::Conv2D) {
      const double receptive = static_cast<double>(spec.kernel_h * spec.kernel_w);
      fan_in = receptive * weights.dim(2);
      fan_out = receptive * weights.dim(3);
    } else {
      fan_in = static_cast<double>(weights.dim(0));
      fan_out = static_cast<double>(weights.dim(1));
    }
    const double limit = feeds_relu ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : weights.values()) v = rng.uniform(-limit, limit);
    params_[i][1].fill(0.0);
  }
}

Tensor Model::predict(const Tensor& input) const { return run(input, nullptr); }

Tensor Model::forward(const Tensor& input, ForwardTrace& trace) const { return run(input, &trace); }

namespace {
template <typename Cache>
Cache* cache_slot(LayerTrace& lt) {
  if (auto* c = std::get_if<Cache>(&lt.cache)) return c;
  return &lt.cache.emplace<Cache>();
}
}  // namespace

Tensor Model::run(const Tensor& input, ForwardTrace* trace) const {
  if (input.shape() != input_shape_) {
    fail(ErrorKind::Parameter, "model input " + shape_string(input.shape()) + " does not match expected " +
                                   shape_string(input_shape_));
  }
  // caches of a reused trace keep their storage across calls
  if (trace) trace->layers.resize(layers_.size());
  Tensor x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& spec = layers_[i];
    LayerTrace* lt = trace ? &trace->layers[i] : nullptr;
    if (lt) lt->input_shape = x.shape();
    switch (spec.kind) {
      case LayerKind::Conv2D: {
        x = conv2d_forward(x, params_[i][0], params_[i][1], lt ? cache_slot<ConvCache>(*lt) : nullptr);
        break;
      }
      case LayerKind::MaxPool2D: {
        x = maxpool2d_forward(x, lt ? cache_slot<PoolCache>(*lt) : nullptr);
        break;
      }
      case LayerKind::Flatten:
        x = x.reshaped({x.size()});
        break;
      case LayerKind::Dense: {
        x = dense_forward(x, params_[i][0], params_[i][1], lt ? cache_slot<DenseCache>(*lt) : nullptr);
        break;
      }
      case LayerKind::Activation:
        x = activation_forward(spec.activation, x);
        if (lt) lt->output = x;
        break;
    }
  }
  return x;
}

void Model::backward(const ForwardTrace& trace, const Tensor& grad_output, ParamSet& grads) const {
  if (trace.layers.size() != layers_.size()) fail(ErrorKind::Parameter, "forward trace does not match the model");
  if (grad_output.shape() != output_shape()) {
    fail(ErrorKind::Parameter, "grad_output " + shape_string(grad_output.shape()) + " does not match model output " +
                                   shape_string(output_shape()));
  }
  Tensor g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const auto& spec = layers_[i];
    const auto& lt = trace.layers[i];
    const bool need_input_grad = i > 0;
    switch (spec.kind) {
      case LayerKind::Conv2D: {
        Tensor gi;
        conv2d_backward(g, std::get<ConvCache>(lt.cache), params_[i][0], need_input_grad ? &gi : nullptr,
                        grads[i][0], grads[i][1]);
        g = std::move(gi);
        break;
      }
      case LayerKind::MaxPool2D:
        g = maxpool2d_backward(g, std::get<PoolCache>(lt.cache));
        break;
      case LayerKind::Flatten:
        g = g.reshaped(lt.input_shape);
        break;
      case LayerKind::Dense: {
        Tensor gi;
        dense_backward(g, std::get<DenseCache>(lt.cache), params_[i][0], need_input_grad ? &gi : nullptr, grads[i][0],
                       grads[i][1]);
        g = std::move(gi);
        break;
      }
      case LayerKind::Activation:
        g = activation_backward(spec.activation, g, lt.output);
        break;
    }
  }
}

Model build_classifier(const Shape& input_shape, std::size_t n_outputs) {
  if (input_shape.size() != 3 || input_shape[0] < 8 || input_shape[1] < 8) {
    fail(ErrorKind::Parameter, "classifier input " + shape_string(input_shape) + " must be [h>=8, w>=8, c]");
  }
  require(n_outputs >= 1, "classifier needs at least one output");
  std::vector<LayerSpec> layers = {
      LayerSpec::conv2d(32),  LayerSpec::act(ActivationKind::Relu), LayerSpec::maxpool2d(),
      LayerSpec::conv2d(64),  LayerSpec::act(ActivationKind::Relu), LayerSpec::maxpool2d(),
      LayerSpec::conv2d(128), LayerSpec::act(ActivationKind::Relu), LayerSpec::maxpool2d(),
      LayerSpec::flatten(),   LayerSpec::dense(128),                LayerSpec::act(ActivationKind::Relu),
  };
  if (n_outputs == 1) {
    layers.push_back(LayerSpec::dense(1));
    layers.push_back(LayerSpec::act(ActivationKind::Sigmoid));
  } else {
    layers.push_back(LayerSpec::dense(n_outputs));
    layers.push_back(LayerSpec::act(ActivationKind::Softmax));
  }
  return Model(input_shape, std::move(layers));
}

Model build_denoiser(const Shape& input_shape) {
  if (input_shape.size() != 3 || input_shape[0] < 8 || input_shape[1] < 8) {
    fail(ErrorKind::Parameter, "denoiser input " + shape_string(input_shape) + " must be [h>=8, w>=8, c]");
  }
  return Model(input_shape, {LayerSpec::conv2d(16), LayerSpec::act(ActivationKind::Relu), LayerSpec::conv2d(32),
                             LayerSpec::act(ActivationKind::Relu), LayerSpec::conv2d(16),
                             LayerSpec::act(ActivationKind::Relu), LayerSpec::conv2d(input_shape[2]),
                             LayerSpec::act(ActivationKind::Sigmoid)});
}

}  // namespace hamnet::nn
