#include "hamnet/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "fft.hpp"
#include "hamnet/error.hpp"

namespace hamnet {

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n));
  }
  return w;
}

Spectrogram stft(const SampleBuffer& buf, std::size_t fft_size, std::size_t hop) {
  require(fft_size >= 2 && fft_size % 2 == 0, "fft_size must be even and >= 2");
  require(hop >= 1 && hop <= fft_size, "hop must lie in [1, fft_size]");
  if (buf.size() < fft_size) {
    fail(ErrorKind::Parameter, "buffer of " + std::to_string(buf.size()) +
                                   " samples is shorter than fft_size " + std::to_string(fft_size) +
                                   "; zero-pad it to at least fft_size samples");
  }
  const std::size_t frames = 1 + (buf.size() - fft_size) / hop;
  const std::size_t bins = fft_size / 2 + 1;
  const auto window = hann_window(fft_size);

  Spectrogram spec;
  spec.magnitudes = Matrix(bins, frames);
  spec.phases = Matrix(bins, frames);
  spec.fft_size = fft_size;
  spec.hop = hop;
  spec.sample_rate = buf.sample_rate();
  spec.signal_length = buf.size();

  std::vector<double> frame(fft_size);
  const auto x = buf.samples();
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < fft_size; ++i) frame[i] = x[f * hop + i] * window[i];
    const auto X = detail::rfft(frame);
    for (std::size_t k = 0; k < bins; ++k) {
      spec.magnitudes(k, f) = std::abs(X[k]);
      (*spec.phases)(k, f) = std::arg(X[k]);
    }
  }
  return spec;
}

SampleBuffer istft(const Spectrogram& spec) {
  if (!spec.phases) fail(ErrorKind::Parameter, "istft needs a spectrogram that retains phases");
  const std::size_t n_fft = spec.fft_size;
  const std::size_t hop = spec.hop;
  const std::size_t bins = n_fft / 2 + 1;
  require(spec.magnitudes.rows == bins && spec.phases->rows == bins &&
              spec.phases->cols == spec.magnitudes.cols,
          "spectrogram geometry is inconsistent with its fft_size");
  require(spec.frames() >= 1, "spectrogram has no frames");

  const std::size_t span = (spec.frames() - 1) * hop + n_fft;
  std::vector<double> out(std::max(span, spec.signal_length), 0.0);
  std::vector<double> weight(out.size(), 0.0);
  const auto window = hann_window(n_fft);
  std::vector<detail::Complex> X(bins);
  for (std::size_t f = 0; f < spec.frames(); ++f) {
    for (std::size_t k = 0; k < bins; ++k) X[k] = std::polar(spec.magnitudes(k, f), (*spec.phases)(k, f));
    const auto frame = detail::irfft(X, n_fft);
    for (std::size_t i = 0; i < n_fft; ++i) {
      out[f * hop + i] += frame[i] * window[i];
      weight[f * hop + i] += window[i] * window[i];
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = weight[i] > 1e-10 ? out[i] / weight[i] : 0.0;
  out.resize(spec.signal_length > 0 ? spec.signal_length : span);
  return SampleBuffer(std::move(out), spec.sample_rate);
}

ReconstructionPadding reconstruction_padding(std::size_t len, std::size_t fft_size, std::size_t hop) {
  require(hop >= 1 && hop <= fft_size, "hop must lie in [1, fft_size]");
  ReconstructionPadding pad;
  pad.leading = hop;
  std::size_t total = len + pad.leading + (fft_size - hop);
  total = std::max(total, fft_size);
  const std::size_t rem = (total - fft_size) % hop;
  if (rem != 0) total += hop - rem;
  pad.trailing = total - len - pad.leading;
  return pad;
}

SampleBuffer pad_for_reconstruction(const SampleBuffer& buf, std::size_t fft_size, std::size_t hop) {
  const auto pad = reconstruction_padding(buf.size(), fft_size, hop);
  std::vector<double> out(pad.leading, 0.0);
  out.insert(out.end(), buf.samples().begin(), buf.samples().end());
  out.resize(out.size() + pad.trailing, 0.0);
  return SampleBuffer(std::move(out), buf.sample_rate());
}

SampleBuffer strip_reconstruction_padding(const SampleBuffer& padded, std::size_t original_len,
                                          std::size_t fft_size, std::size_t hop) {
  const auto pad = reconstruction_padding(original_len, fft_size, hop);
  require(padded.size() >= pad.leading + original_len, "padded buffer is too short");
  const auto s = padded.samples().subspan(pad.leading, original_len);
  return SampleBuffer(std::vector<double>(s.begin(), s.end()), padded.sample_rate());
}

// ---- normalisation ------------------------------------------------------------

std::vector<double> minmax_normalize(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range < 1e-12) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

Matrix minmax_normalize(const Matrix& m) {
  Matrix out(m.rows, m.cols);
  out.data = minmax_normalize(m.data);
  return out;
}

std::vector<double> zscore_normalize(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  if (sd < 1e-12) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

Matrix zscore_normalize(const Matrix& m) {
  Matrix out(m.rows, m.cols);
  out.data = zscore_normalize(m.data);
  return out;
}

Matrix log_compress_normalize(const Matrix& magnitudes) {
  Matrix logged(magnitudes.rows, magnitudes.cols);
  for (std::size_t i = 0; i < magnitudes.data.size(); ++i) {
    logged.data[i] = std::log1p(magnitudes.data[i] / 1e-6);
  }
  return minmax_normalize(logged);
}

// ---- statistics ------------------------------------------------------------

TimeStats time_stats(std::span<const double> x) {
  require(x.size() >= 2, "time_stats needs at least 2 samples");
  const double n = static_cast<double>(x.size());
  TimeStats s;
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.variance = m2;
  if (m2 >= 1e-12) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

double spectral_entropy(std::span<const double> power) {
  require(power.size() >= 2, "spectral_entropy needs at least 2 bins");
  double total = 0.0;
  for (double p : power) {
    require(p >= 0.0 && std::isfinite(p), "spectral_entropy needs nonnegative finite power");
    total += p;
  }
  if (total <= 0.0) fail(ErrorKind::Parameter, "spectral_entropy of an all-zero spectrum is undefined");
  double h = 0.0;
  for (double p : power) {
    if (p > 0.0) {
      const double q = p / total;
      h -= q * std::log(q);
    }
  }
  return std::clamp(h / std::log(static_cast<double>(power.size())), 0.0, 1.0);
}

double mean_spectral_entropy(const Spectrogram& spec) {
  std::vector<double> power(spec.bins());
  double acc = 0.0;
  std::size_t used = 0;
  for (std::size_t f = 0; f < spec.frames(); ++f) {
    double total = 0.0;
    for (std::size_t k = 0; k < spec.bins(); ++k) {
      power[k] = spec.magnitudes(k, f) * spec.magnitudes(k, f);
      total += power[k];
    }
    if (total <= 0.0) continue;  // silent frames carry no distribution
    acc += spectral_entropy(power);
    ++used;
  }
  return used ? acc / static_cast<double>(used) : 0.0;
}

double estimate_snr(const SampleBuffer& observed, const SampleBuffer& reference_clean) {
  if (observed.size() != reference_clean.size()) {
    fail(ErrorKind::Parameter, "estimate_snr length mismatch: observed " + std::to_string(observed.size()) +
                                   " vs reference " + std::to_string(reference_clean.size()));
  }
  require(observed.sample_rate() == reference_clean.sample_rate(), "estimate_snr sample-rate mismatch");
  const double p_ref = reference_clean.power();
  if (p_ref <= 0.0) fail(ErrorKind::Parameter, "estimate_snr reference has zero power");
  double residual = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - reference_clean[i];
    residual += d * d;
  }
  residual /= static_cast<double>(observed.size());
  if (residual < p_ref * 1e-10) return kSnrClampDb;
  return std::min(kSnrClampDb, 10.0 * std::log10(p_ref / residual));
}

// ---- mel / MFCC ------------------------------------------------------------

double hz_to_mel(double hz) noexcept { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) noexcept { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank mel_filterbank(std::size_t n_mels, std::size_t fft_size, int sample_rate, double f_min,
                             double f_max) {
  require(n_mels >= 1, "n_mels must be positive");
  require(fft_size >= 2 && sample_rate > 0, "invalid fft_size or sample_rate");
  if (f_max < 0.0) f_max = 0.5 * sample_rate;
  require(f_min >= 0.0 && f_min < f_max && f_max <= 0.5 * sample_rate,
          "mel band edges must satisfy 0 <= f_min < f_max <= sample_rate/2");

  const std::size_t bins = fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (n_mels + 1));
  }

  MelFilterbank bank{n_mels, Matrix(n_mels, bins), f_min, f_max};
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double l = edges[m], c = edges[m + 1], r = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      const double rise = (f - l) / (c - l);
      const double fall = (r - f) / (r - c);
      bank.weights(m, k) = std::max(0.0, std::min(rise, fall));
    }
  }
  return bank;
}

Matrix dct_matrix(std::size_t n) {
  Matrix d(n, n);
  const double n_d = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n_d) : std::sqrt(2.0 / n_d);
    for (std::size_t i = 0; i < n; ++i) {
      d(k, i) = scale * std::cos(std::numbers::pi * static_cast<double>(k) * (i + 0.5) / n_d);
    }
  }
  return d;
}

Matrix mfcc(const Spectrogram& spec, const MelFilterbank& bank, std::size_t n_mfcc) {
  if (n_mfcc > bank.n_mels) {
    fail(ErrorKind::Parameter, "n_mfcc " + std::to_string(n_mfcc) + " exceeds n_mels " +
                                   std::to_string(bank.n_mels));
  }
  require(bank.weights.cols == spec.bins(), "filterbank width does not match spectrogram bins");
  const Matrix dct = dct_matrix(bank.n_mels);
  Matrix out(n_mfcc, spec.frames());
  std::vector<double> log_energy(bank.n_mels);
  for (std::size_t f = 0; f < spec.frames(); ++f) {
    for (std::size_t m = 0; m < bank.n_mels; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < spec.bins(); ++k) {
        const double mag = spec.magnitudes(k, f);
        e += bank.weights(m, k) * mag * mag;
      }
      log_energy[m] = std::log(std::max(e, kLogFloor));
    }
    for (std::size_t c = 0; c < n_mfcc; ++c) {
      double acc = 0.0;
      for (std::size_t m = 0; m < bank.n_mels; ++m) acc += dct(c, m) * log_energy[m];
      out(c, f) = acc;
    }
  }
  return out;
}

std::size_t peak_bin(const Spectrogram& spec, std::optional<std::size_t> frame) {
  require(spec.frames() > 0, "empty spectrogram");
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t k = 0; k < spec.bins(); ++k) {
    double v = 0.0;
    if (frame) {
      require(*frame < spec.frames(), "frame index out of range");
      v = spec.magnitudes(k, *frame);
    } else {
      for (std::size_t f = 0; f < spec.frames(); ++f) v += spec.magnitudes(k, f) * spec.magnitudes(k, f);
    }
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  return best;
}

}  // namespace hamnet
