#pragma once

#include <cstdint>
#include <string_view>

#include "hamnet/signal.hpp"

namespace hamnet {

enum class AugmentOp { Noise, Stretch, Pitch, Gain, CropPad };

std::string_view to_string(AugmentOp op) noexcept;
AugmentOp parse_augment_op(std::string_view name);

/// One augmentation. `magnitude` is interpreted per op: snr_db (noise),
/// stretch factor (stretch), semitones (pitch), linear gain (gain) or
/// target length in samples (crop_pad).
struct AugmentSpec {
  AugmentOp op = AugmentOp::Gain;
  double magnitude = 1.0;
  std::uint64_t seed = 0;
};

SampleBuffer inject_noise(const SampleBuffer& buf, double snr_db, std::uint64_t seed);

inline constexpr std::size_t kVocoderFftSize = 1024;
inline constexpr std::size_t kVocoderHop = 256;

/// Phase-vocoder time stretch; factor in [0.5, 2] and the output has
/// round(len * factor) samples.
SampleBuffer time_stretch(const SampleBuffer& buf, double factor);

/// Linear-interpolation resampler: the output has round(len * ratio) samples
/// and sample m is read at input position m / ratio.
SampleBuffer resample_linear(const SampleBuffer& buf, double ratio);

/// Resample by 2^(-semitones/12), then stretch back to the input length.
SampleBuffer pitch_shift(const SampleBuffer& buf, double semitones);

SampleBuffer amplitude_scale(const SampleBuffer& buf, double gain);

/// Seeded crop (longer input) or split zero-pad (shorter input) to target_len.
SampleBuffer random_crop_pad(const SampleBuffer& buf, std::size_t target_len, std::uint64_t seed);

SampleBuffer apply_augment(const SampleBuffer& buf, const AugmentSpec& spec);

}  // namespace hamnet
