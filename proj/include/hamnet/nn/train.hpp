#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "hamnet/nn/optim.hpp"

namespace hamnet::nn {

struct Example {
  Tensor input;
  Tensor target;
};

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 10;
  std::size_t patience = 3;
  LossKind loss = LossKind::Bce;
  std::uint64_t seed = 0;  // drives the per-epoch shuffles
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> train_accuracy;
  double val_loss = 0.0;
  std::optional<double> val_accuracy;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based; its parameters are what train() leaves in the model
  bool stopped_early = false;

  nlohmann::ordered_json to_json() const;
  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

/// Fraction of examples classified correctly: threshold 0.5 for a single
/// output, argmax otherwise. Returns nullopt for the mse loss.
std::optional<double> accuracy(const Model& model, std::span<const Example> examples, LossKind loss);

/// Mean per-example loss.
double mean_loss(const Model& model, std::span<const Example> examples, LossKind loss);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam with batch-averaged gradients and early stopping on the
/// validation loss. The model ends holding the best-validation parameters.
TrainHistory train(Model& model, std::span<const Example> train_set, std::span<const Example> val_set,
                   const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace hamnet::nn
