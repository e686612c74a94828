#include "hamnet/nn/train.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "hamnet/error.hpp"
#include "hamnet/rng.hpp"

namespace hamnet::nn {

using nlohmann::ordered_json;

namespace {

bool is_correct(const Tensor& pred, const Tensor& target) {
  if (pred.size() == 1) return (pred[0] >= 0.5) == (target[0] >= 0.5);
  std::size_t p = 0, t = 0;
  for (std::size_t i = 1; i < pred.size(); ++i) {
    if (pred[i] > pred[p]) p = i;
    if (target[i] > target[t]) t = i;
  }
  return p == t;
}

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

ordered_json TrainHistory::to_json() const {
  ordered_json j;
  j["best_epoch"] = best_epoch;
  j["stopped_early"] = stopped_early;
  j["epochs"] = ordered_json::array();
  for (const auto& e : epochs) {
    j["epochs"].push_back({{"epoch", e.epoch},
                           {"train_loss", e.train_loss},
                           {"train_accuracy", optional_number(e.train_accuracy)},
                           {"val_loss", e.val_loss},
                           {"val_accuracy", optional_number(e.val_accuracy)}});
  }
  return j;
}

std::optional<double> accuracy(const Model& model, std::span<const Example> examples, LossKind loss) {
  if (loss == LossKind::Mse || examples.empty()) return std::nullopt;
  std::size_t correct = 0;
  for (const auto& ex : examples) correct += is_correct(model.predict(ex.input), ex.target);
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

double mean_loss(const Model& model, std::span<const Example> examples, LossKind loss) {
  require(!examples.empty(), "mean_loss of an empty set");
  double acc = 0.0;
  for (const auto& ex : examples) acc += compute_loss(loss, model.predict(ex.input), ex.target).loss;
  return acc / static_cast<double>(examples.size());
}

TrainHistory train(Model& model, std::span<const Example> train_set, std::span<const Example> val_set,
                   const TrainConfig& config, const EpochCallback& on_epoch) {
  if (train_set.empty()) fail(ErrorKind::Validation, "empty dataset: the training split has no examples");
  if (val_set.empty()) fail(ErrorKind::Validation, "empty dataset: the validation split has no examples");
  require(config.batch_size >= 1, "batch_size must be at least 1");
  require(config.max_epochs >= 1, "max_epochs must be at least 1");
  require(config.learning_rate > 0.0, "learning_rate must be positive");

  Rng rng(config.seed);
  AdamConfig adam{config.learning_rate};
  AdamState state = AdamState::for_params(model.params());
  ParamSet grads = zeros_like(model.params());

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainHistory history;
  ParamSet best_params = model.params();
  double best_val = 0.0;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    ForwardTrace trace;  // reused so layer caches keep their storage
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      for (auto& layer : grads) {
        for (auto& t : layer) t.fill(0.0);
      }
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const auto& ex = train_set[order[b]];
        const Tensor pred = model.forward(ex.input, trace);
        const auto lr = compute_loss(config.loss, pred, ex.target);
        if (!std::isfinite(lr.loss)) {
          std::ostringstream os;
          os << "non-finite loss " << lr.loss << " at epoch " << epoch << ", batch " << batch_index + 1
             << " (example " << order[b] << ")";
          fail(ErrorKind::Training, os.str());
        }
        batch_loss += lr.loss;
        correct += is_correct(pred, ex.target);
        model.backward(trace, lr.grad, grads);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (auto& layer : grads) {
        for (auto& t : layer) {
          for (auto& v : t.values()) v *= scale;
        }
      }
      adam_step(model.params(), grads, state, adam);
      loss_sum += batch_loss;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    if (config.loss != LossKind::Mse) rec.train_accuracy = static_cast<double>(correct) / order.size();
    rec.val_loss = mean_loss(model, val_set, config.loss);
    if (!std::isfinite(rec.val_loss)) {
      fail(ErrorKind::Training, "non-finite validation loss at epoch " + std::to_string(epoch));
    }
    rec.val_accuracy = accuracy(model, val_set, config.loss);
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (epoch == 1 || rec.val_loss < best_val) {
      best_val = rec.val_loss;
      best_params = model.params();
      history.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best >= std::max<std::size_t>(config.patience, 1)) {
        history.stopped_early = epoch < config.max_epochs;
        break;
      }
    }
  }
  model.params() = std::move(best_params);
  return history;
}

}  // namespace hamnet::nn
