#include "hamnet/augment.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "hamnet/dsp.hpp"
#include "hamnet/error.hpp"
#include "hamnet/rng.hpp"
#include "hamnet/synth.hpp"

namespace hamnet {
namespace {

double wrap_phase(double x) { return x - 2.0 * std::numbers::pi * std::round(x / (2.0 * std::numbers::pi)); }

// Frequency below which 99% of the signal energy lies.
double occupied_bandwidth_hz(const SampleBuffer& buf) {
  const auto X = detail::rfft(buf.samples());
  double total = 0.0;
  for (const auto& v : X) total += std::norm(v);
  if (total <= 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    acc += std::norm(X[k]);
    if (acc >= 0.99 * total) return static_cast<double>(k) * buf.sample_rate() / buf.size();
  }
  return 0.5 * buf.sample_rate();
}

}  // namespace

std::string_view to_string(AugmentOp op) noexcept {
  switch (op) {
    case AugmentOp::Noise: return "noise";
    case AugmentOp::Stretch: return "stretch";
    case AugmentOp::Pitch: return "pitch";
    case AugmentOp::Gain: return "gain";
    case AugmentOp::CropPad: return "crop_pad";
  }
  return "gain";
}

AugmentOp parse_augment_op(std::string_view name) {
  for (auto op : {AugmentOp::Noise, AugmentOp::Stretch, AugmentOp::Pitch, AugmentOp::Gain, AugmentOp::CropPad}) {
    if (name == to_string(op)) return op;
  }
  fail(ErrorKind::Config, "unknown augmentation '" + std::string(name) +
                              "' (expected noise, stretch, pitch, gain or crop_pad)");
}

SampleBuffer inject_noise(const SampleBuffer& buf, double snr_db, std::uint64_t seed) {
  return add_awgn(buf, snr_db, seed);
}

SampleBuffer time_stretch(const SampleBuffer& buf, double factor) {
  if (!(factor >= 0.5 && factor <= 2.0)) {
    fail(ErrorKind::Parameter, "stretch factor " + std::to_string(factor) + " outside [0.5, 2]");
  }
  constexpr std::size_t n_fft = kVocoderFftSize;
  constexpr std::size_t hop = kVocoderHop;
  constexpr std::size_t half = n_fft / 2;

  // centre the frames: half a window of zeros on both sides
  std::vector<double> padded(half, 0.0);
  padded.insert(padded.end(), buf.samples().begin(), buf.samples().end());
  padded.resize(padded.size() + half, 0.0);
  const auto in = stft(SampleBuffer(std::move(padded), buf.sample_rate()), n_fft, hop);
  const auto& in_mag = in.magnitudes;
  const auto& in_phase = *in.phases;
  const std::size_t bins = in.bins();
  const std::size_t frames_in = in.frames();

  const double rate = 1.0 / factor;
  std::vector<double> steps;
  for (double t = 0.0; t < static_cast<double>(frames_in); t += rate) steps.push_back(t);

  Spectrogram out = in;
  out.magnitudes = Matrix(bins, steps.size());
  out.phases = Matrix(bins, steps.size());
  out.signal_length = (steps.size() - 1) * hop + n_fft;

  std::vector<double> advance(bins);
  std::vector<double> acc(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    advance[k] = 2.0 * std::numbers::pi * hop * static_cast<double>(k) / n_fft;
    acc[k] = in_phase(k, 0);
  }
  auto mag_at = [&](std::size_t k, std::size_t f) { return f < frames_in ? in_mag(k, f) : 0.0; };
  auto phase_at = [&](std::size_t k, std::size_t f) { return f < frames_in ? in_phase(k, f) : 0.0; };
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto f0 = static_cast<std::size_t>(steps[t]);
    const double alpha = steps[t] - static_cast<double>(f0);
    for (std::size_t k = 0; k < bins; ++k) {
      out.magnitudes(k, t) = (1.0 - alpha) * mag_at(k, f0) + alpha * mag_at(k, f0 + 1);
      (*out.phases)(k, t) = acc[k];
      const double dphase = wrap_phase(phase_at(k, f0 + 1) - phase_at(k, f0) - advance[k]);
      acc[k] += advance[k] + dphase;
    }
  }

  const auto y = istft(out);
  const auto target = static_cast<std::size_t>(std::llround(buf.size() * factor));
  std::vector<double> result(std::max<std::size_t>(target, 1), 0.0);
  for (std::size_t i = 0; i < result.size() && half + i < y.size(); ++i) result[i] = y[half + i];
  return SampleBuffer(std::move(result), buf.sample_rate());
}

SampleBuffer resample_linear(const SampleBuffer& buf, double ratio) {
  require(ratio > 0.0 && std::isfinite(ratio), "resample ratio must be positive");
  const std::size_t n = buf.size();
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n * ratio)));
  const auto x = buf.samples();
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double pos = static_cast<double>(i) / ratio;
    const auto j = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(j);
    const double a = j < n ? x[j] : 0.0;
    const double b = j + 1 < n ? x[j + 1] : 0.0;
    out[i] = a + frac * (b - a);
  }
  return SampleBuffer(std::move(out), buf.sample_rate());
}

SampleBuffer pitch_shift(const SampleBuffer& buf, double semitones) {
  if (!(std::abs(semitones) <= 12.0)) {
    fail(ErrorKind::Parameter, "pitch shift of " + std::to_string(semitones) + " semitones exceeds +/-12");
  }
  const double shift = std::pow(2.0, semitones / 12.0);
  if (semitones > 0.0) {
    const double top = occupied_bandwidth_hz(buf) * shift;
    if (top >= 0.5 * buf.sample_rate()) {
      fail(ErrorKind::Parameter, "pitch shift moves content to " + std::to_string(top) +
                                     " Hz, past the Nyquist frequency");
    }
  }
  const double ratio = 1.0 / shift;
  const auto resampled = resample_linear(buf, ratio);
  auto stretched = time_stretch(resampled, shift);
  auto samples = stretched.vector();
  samples.resize(buf.size(), 0.0);
  return SampleBuffer(std::move(samples), buf.sample_rate());
}

SampleBuffer amplitude_scale(const SampleBuffer& buf, double gain) {
  require(gain >= 0.0 && std::isfinite(gain), "gain must be finite and nonnegative");
  auto out = buf.vector();
  for (double& v : out) v *= gain;
  return SampleBuffer(std::move(out), buf.sample_rate());
}

SampleBuffer random_crop_pad(const SampleBuffer& buf, std::size_t target_len, std::uint64_t seed) {
  require(target_len > 0, "target length must be positive");
  const std::size_t n = buf.size();
  if (n == target_len) return buf;
  Rng rng(seed);
  const auto x = buf.samples();
  if (n > target_len) {
    const auto offset = static_cast<std::size_t>(rng.below(n - target_len + 1));
    return SampleBuffer(std::vector<double>(x.begin() + offset, x.begin() + offset + target_len),
                        buf.sample_rate());
  }
  const auto lead = static_cast<std::size_t>(rng.below(target_len - n + 1));
  std::vector<double> out(target_len, 0.0);
  std::copy(x.begin(), x.end(), out.begin() + lead);
  return SampleBuffer(std::move(out), buf.sample_rate());
}

SampleBuffer apply_augment(const SampleBuffer& buf, const AugmentSpec& spec) {
  switch (spec.op) {
    case AugmentOp::Noise: return inject_noise(buf, spec.magnitude, spec.seed);
    case AugmentOp::Stretch: return time_stretch(buf, spec.magnitude);
    case AugmentOp::Pitch: return pitch_shift(buf, spec.magnitude);
    case AugmentOp::Gain: return amplitude_scale(buf, spec.magnitude);
    case AugmentOp::CropPad: {
      require(spec.magnitude >= 1.0, "crop_pad target length must be at least 1 sample");
      return random_crop_pad(buf, static_cast<std::size_t>(std::llround(spec.magnitude)), spec.seed);
    }
  }
  fail(ErrorKind::Internal, "unhandled augmentation");
}

}  // namespace hamnet
