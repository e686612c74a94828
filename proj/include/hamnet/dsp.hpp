#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hamnet/signal.hpp"

namespace hamnet {

inline constexpr std::size_t kFftSize = 256;
inline constexpr std::size_t kHop = 128;

enum class WindowKind { Hann };

/// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

/// Magnitude (and optionally phase) of a Hann-windowed STFT, laid out
/// [freq_bins x frames] with freq_bins = fft_size/2 + 1.
struct Spectrogram {
  Matrix magnitudes;
  std::optional<Matrix> phases;
  std::size_t fft_size = kFftSize;
  std::size_t hop = kHop;
  WindowKind window = WindowKind::Hann;
  int sample_rate = kDefaultSampleRate;
  std::size_t signal_length = 0;  // samples in the analysed buffer

  std::size_t bins() const noexcept { return magnitudes.rows; }
  std::size_t frames() const noexcept { return magnitudes.cols; }
  double bin_hz() const noexcept { return static_cast<double>(sample_rate) / fft_size; }
};

/// frames = 1 + (len - fft_size) / hop. Requires len >= fft_size and hop <= fft_size.
Spectrogram stft(const SampleBuffer& buf, std::size_t fft_size = kFftSize, std::size_t hop = kHop);

/// Weighted overlap-add inverse. Output has spec.signal_length samples; samples
/// not covered by any frame (the tail past the last frame) are zero.
SampleBuffer istft(const Spectrogram& spec);

/// Zero padding that makes every sample of a len-sample signal recoverable by
/// istft: hop samples in front, and enough behind to complete the last frame.
struct ReconstructionPadding {
  std::size_t leading = 0;
  std::size_t trailing = 0;
};
ReconstructionPadding reconstruction_padding(std::size_t len, std::size_t fft_size = kFftSize,
                                             std::size_t hop = kHop);
SampleBuffer pad_for_reconstruction(const SampleBuffer& buf, std::size_t fft_size = kFftSize,
                                    std::size_t hop = kHop);
SampleBuffer strip_reconstruction_padding(const SampleBuffer& padded, std::size_t original_len,
                                          std::size_t fft_size = kFftSize, std::size_t hop = kHop);

// ---- normalisation ------------------------------------------------------------

/// (x - min)/(max - min); all zeros when max - min < 1e-12.
std::vector<double> minmax_normalize(std::span<const double> values);
Matrix minmax_normalize(const Matrix& m);

/// (x - mean)/std with population std; all zeros for constant input.
std::vector<double> zscore_normalize(std::span<const double> values);
Matrix zscore_normalize(const Matrix& m);

/// log(1 + magnitude/1e-6) then per-example min-max to [0, 1].
Matrix log_compress_normalize(const Matrix& magnitudes);

// ---- statistics ------------------------------------------------------------

struct TimeStats {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;  // excess
};

/// Population moments; skewness and kurtosis are 0 when variance < 1e-12.
TimeStats time_stats(std::span<const double> x);
inline TimeStats time_stats(const SampleBuffer& buf) { return time_stats(buf.samples()); }

/// Normalised Shannon entropy of a power spectrum, in [0, 1].
double spectral_entropy(std::span<const double> power);

/// Mean per-frame spectral entropy of |X|^2.
double mean_spectral_entropy(const Spectrogram& spec);

inline constexpr double kSnrClampDb = 100.0;

/// 10 log10(P(reference) / P(observed - reference)), clamped to +100 dB.
double estimate_snr(const SampleBuffer& observed, const SampleBuffer& reference_clean);

// ---- mel / MFCC ------------------------------------------------------------

double hz_to_mel(double hz) noexcept;
double mel_to_hz(double mel) noexcept;

struct MelFilterbank {
  std::size_t n_mels = 0;
  Matrix weights;  // [n_mels x freq_bins]
  double f_min = 0.0;
  double f_max = 0.0;
};

/// Triangular filters on mel-spaced centres. f_max < 0 means sample_rate/2.
MelFilterbank mel_filterbank(std::size_t n_mels, std::size_t fft_size, int sample_rate,
                             double f_min = 0.0, double f_max = -1.0);

/// Orthonormal DCT-II basis, [n x n].
Matrix dct_matrix(std::size_t n);

inline constexpr std::size_t kMelBands = 26;
inline constexpr std::size_t kMfccCount = 13;
inline constexpr double kLogFloor = 1e-10;

/// [n_mfcc x frames] cepstra of log mel energies of |X|^2.
Matrix mfcc(const Spectrogram& spec, const MelFilterbank& bank, std::size_t n_mfcc = kMfccCount);

/// Spectrogram peak bin of frame `frame`, or of the frame-summed power when frame is nullopt.
std::size_t peak_bin(const Spectrogram& spec, std::optional<std::size_t> frame = std::nullopt);

}  // namespace hamnet
