#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hamnet/dataset.hpp"
#include "hamnet/dsp.hpp"
#include "hamnet/nn/model.hpp"
#include "hamnet/nn/tensor.hpp"

namespace hamnet {

// ---- model I/O conventions ----------------------------------------------------

enum class Task { Classify, Denoise };
std::string_view to_string(Task task) noexcept;
Task parse_task(std::string_view name);

/// A model whose output shape equals its input shape is a denoiser.
Task infer_task(const nn::Model& model);

/// Label names for a classifier: one output means {clean, noisy} with the
/// sigmoid giving P(noisy); six outputs mean the signal classes in enum order.
std::vector<std::string> output_labels(const nn::Model& model);

/// Classifier input: log-compressed, min-max normalised magnitudes, [bins, frames, 1].
nn::Tensor classifier_input(const SampleBuffer& buf);

/// Denoiser input for a signal already padded for reconstruction.
nn::Tensor denoiser_input(const Spectrogram& padded_noisy);

/// Ideal ratio mask min(1, |clean| / |noisy|), [bins, frames, 1].
nn::Tensor ratio_mask_target(const Spectrogram& padded_noisy, const Spectrogram& padded_clean);

/// Same layers and parameters, different input geometry (fully convolutional models only).
nn::Model with_input_shape(const nn::Model& model, const nn::Shape& input_shape);

struct Denoised {
  SampleBuffer signal;
  double mean_mask = 0.0;
};

/// Masks the noisy magnitudes, reuses the noisy phase, inverts and strips the padding.
Denoised denoise_signal(const nn::Model& denoiser, const SampleBuffer& noisy);

struct Classification {
  std::string label;
  double score = 0.0;  // probability of `label`
};
Classification classify_signal(const nn::Model& classifier, const SampleBuffer& buf);

/// Records whose signal can be regenerated from their seed (not augmented).
bool is_regenerable(const DatasetRecord& record);

// ---- commands -------------------------------------------------------------------

inline constexpr std::string_view kCommands[] = {"synth", "augment", "clean",    "train",
                                                 "eval",  "denoise", "classify", "kfold"};

/// Runs one command from a JSON config object. Unknown keys are a Config
/// error. Commands with an "out" directory write resolved_config.json there.
/// Returns a JSON summary of what was produced.
nlohmann::ordered_json run_command(std::string_view command, const nlohmann::ordered_json& config);

nlohmann::ordered_json cmd_synth(const nlohmann::ordered_json& config);
nlohmann::ordered_json cmd_augment(const nlohmann::ordered_json& config);
nlohmann::ordered_json cmd_clean(const nlohmann::ordered_json& config);
nlohmann::ordered_json cmd_train(const nlohmann::ordered_json& config);
nlohmann::ordered_json cmd_eval(const nlohmann::ordered_json& config);
nlohmann::ordered_json cmd_denoise(const nlohmann::ordered_json& config);
nlohmann::ordered_json cmd_classify(const nlohmann::ordered_json& config);
nlohmann::ordered_json cmd_kfold(const nlohmann::ordered_json& config);

}  // namespace hamnet
