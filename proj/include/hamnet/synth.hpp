#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hamnet/signal.hpp"

namespace hamnet {

enum class SignalClass { CW, AM, FM, PSK31, FSK8, NOISE };

std::string_view to_string(SignalClass c) noexcept;
SignalClass parse_signal_class(std::string_view name);

/// Target SNR in dB; std::nullopt means "clean" (no noise added).
using SnrSetting = std::optional<double>;

inline constexpr double kPsk31Baud = 31.25;
inline constexpr double kCwEdgeSeconds = 0.005;

// ---- elementary generators ------------------------------------------------

/// amplitude * sin(2*pi*freq*n/sample_rate + phase), round(duration_s*sample_rate) samples.
SampleBuffer gen_tone(double freq, double amplitude, double duration_s, int sample_rate,
                      double phase = 0.0);

/// One run of constant key state on the Morse timeline.
struct KeySegment {
  bool key_down = false;
  int units = 0;
  std::size_t start_sample = 0;
  std::size_t length_samples = 0;
};

struct CwSignal {
  SampleBuffer buffer;
  std::vector<KeySegment> timeline;  // leading silence excluded, trailing word gap excluded
  double unit_s = 0.0;
  int total_units = 0;               // timeline length in units
};

/// Morse-keyed tone. With no duration the buffer spans the keyed pattern plus
/// one trailing word gap; otherwise it is truncated or zero padded.
CwSignal gen_cw(std::string_view text, double wpm, double tone_freq, int sample_rate,
                std::optional<double> duration_s = std::nullopt, double amplitude = 1.0);

/// Morse code for one character ("." and "-"), or empty when unsupported.
std::string_view morse_code_for(char c) noexcept;

/// Differential BPSK at 31.25 baud with raised-cosine reversals.
/// bit 0 reverses the carrier phase across its symbol, bit 1 keeps it.
SampleBuffer gen_psk31(std::span<const std::uint8_t> bits, double carrier_freq, int sample_rate,
                       double amplitude = 1.0);

std::size_t psk31_samples_per_symbol(int sample_rate);

SampleBuffer gen_am(double carrier_freq, double mod_freq, double depth, double amplitude,
                    double duration_s, int sample_rate);

SampleBuffer gen_fm(double carrier_freq, double mod_freq, double deviation, double amplitude,
                    double duration_s, int sample_rate);

/// Phase-continuous 8-FSK: symbol s sits at base_freq + s*spacing.
SampleBuffer gen_fsk8(std::span<const int> symbols, double base_freq, double spacing, double baud,
                      int sample_rate, double amplitude = 1.0);

/// Zero-mean white Gaussian noise with standard deviation sigma.
SampleBuffer gen_noise(double sigma, double duration_s, int sample_rate, std::uint64_t seed);

// ---- impairments ------------------------------------------------------------

/// buf + N(0, P_signal / 10^(snr_db/10)), deterministic in seed.
SampleBuffer add_awgn(const SampleBuffer& buf, double snr_db, std::uint64_t seed);

/// Linear frequency drift applied by heterodyning the analytic signal with a chirp.
SampleBuffer apply_drift(const SampleBuffer& buf, double drift_hz_per_s);

// ---- spec-driven synthesis --------------------------------------------------

struct ClassParams {
  double amplitude = 0.5;
  double tone_hz = 0.0;        // CW tone, AM/FM/PSK31 carrier, FSK8 base
  double wpm = 0.0;
  std::string text;            // CW payload
  std::vector<std::uint8_t> bits;  // PSK31 payload
  std::vector<int> symbols;    // FSK8 payload
  double depth = 0.0;          // AM
  double mod_hz = 0.0;         // AM/FM
  double deviation_hz = 0.0;   // FM
  double spacing_hz = 6.25;    // FSK8
  double baud = 6.25;          // FSK8
  double noise_sigma = 0.0;    // NOISE
};

struct SignalSpec {
  SignalClass signal_class = SignalClass::CW;
  double duration_s = 1.0;
  int sample_rate = kDefaultSampleRate;
  SnrSetting snr_db;
  std::uint64_t seed = 0;
  ClassParams params;
};

/// Draws class parameters from the seed. Same inputs, same spec.
SignalSpec make_signal_spec(SignalClass signal_class, double duration_s, int sample_rate,
                            SnrSetting snr_db, std::uint64_t seed);

/// The noiseless signal described by spec, exactly duration_s long.
SampleBuffer render_clean(const SignalSpec& spec);

/// render_clean plus AWGN at spec.snr_db (identity when clean).
SampleBuffer render(const SignalSpec& spec);

/// Seed used for the AWGN stage of render().
std::uint64_t noise_seed(const SignalSpec& spec) noexcept;

}  // namespace hamnet
