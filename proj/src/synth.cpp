#include "hamnet/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

#include "fft.hpp"
#include "hamnet/error.hpp"
#include "hamnet/rng.hpp"

namespace hamnet {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t sample_count(double duration_s, int sample_rate) {
  require(sample_rate > 0, "sample_rate must be positive");
  require(duration_s > 0.0 && std::isfinite(duration_s), "duration_s must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  require(n >= 1, "duration_s too short for one sample");
  return n;
}

double nyquist(int sample_rate) { return 0.5 * sample_rate; }

void require_below_nyquist(double freq, int sample_rate, const char* what) {
  if (!(freq >= 0.0 && freq < nyquist(sample_rate))) {
    fail(ErrorKind::Parameter, std::string(what) + " " + std::to_string(freq) +
                                   " Hz must lie in [0, " + std::to_string(nyquist(sample_rate)) +
                                   ") Hz");
  }
}

// Shared by every carrier generator so that degenerate modulation settings
// reproduce gen_tone bit for bit.
inline double carrier_phase(double freq, std::size_t n, int sample_rate) {
  return kTwoPi * freq * static_cast<double>(n) / sample_rate;
}

std::vector<double> fit_length(std::vector<double> x, std::size_t n) {
  x.resize(n, 0.0);
  return x;
}

}  // namespace

std::string_view to_string(SignalClass c) noexcept {
  switch (c) {
    case SignalClass::CW: return "CW";
    case SignalClass::AM: return "AM";
    case SignalClass::FM: return "FM";
    case SignalClass::PSK31: return "PSK31";
    case SignalClass::FSK8: return "FSK8";
    case SignalClass::NOISE: return "NOISE";
  }
  return "NOISE";
}

SignalClass parse_signal_class(std::string_view name) {
  for (auto c : {SignalClass::CW, SignalClass::AM, SignalClass::FM, SignalClass::PSK31,
                 SignalClass::FSK8, SignalClass::NOISE}) {
    if (name == to_string(c)) return c;
  }
  fail(ErrorKind::Validation, "unknown signal class '" + std::string(name) + "'");
}

SampleBuffer gen_tone(double freq, double amplitude, double duration_s, int sample_rate,
                      double phase) {
  const std::size_t n = sample_count(duration_s, sample_rate);
  require_below_nyquist(freq, sample_rate, "tone frequency");
  require(amplitude >= 0.0, "amplitude must be nonnegative");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = amplitude * std::sin(carrier_phase(freq, i, sample_rate) + phase);
  }
  return SampleBuffer(std::move(out), sample_rate);
}

// ---- CW ---------------------------------------------------------------------

std::string_view morse_code_for(char c) noexcept {
  static constexpr std::array<std::string_view, 26> letters = {
      ".-",   "-...", "-.-.", "-..",  ".",   "..-.", "--.",  "....", "..",
      ".---", "-.-",  ".-..", "--",   "-.",  "---",  ".--.", "--.-", ".-.",
      "...",  "-",    "..-",  "...-", ".--", "-..-", "-.--", "--.."};
  static constexpr std::array<std::string_view, 10> digits = {
      "-----", ".----", "..---", "...--", "....-", ".....", "-....", "--...", "---..", "----."};
  if (c >= 'A' && c <= 'Z') return letters[static_cast<std::size_t>(c - 'A')];
  if (c >= '0' && c <= '9') return digits[static_cast<std::size_t>(c - '0')];
  return {};
}

CwSignal gen_cw(std::string_view text, double wpm, double tone_freq, int sample_rate,
                std::optional<double> duration_s, double amplitude) {
  require(wpm > 0.0, "wpm must be positive");
  require_below_nyquist(tone_freq, sample_rate, "CW tone frequency");

  // (key_down, units) runs; consecutive spaces collapse into one word gap
  std::vector<std::pair<bool, int>> runs;
  bool pending_word_gap = false;
  for (char c : text) {
    if (c == ' ') {
      pending_word_gap = !runs.empty();
      continue;
    }
    const auto code = morse_code_for(c);
    if (code.empty()) {
      fail(ErrorKind::Parameter, std::string("unsupported CW character '") + c + "'");
    }
    if (!runs.empty()) runs.emplace_back(false, pending_word_gap ? 7 : 3);
    pending_word_gap = false;
    for (std::size_t i = 0; i < code.size(); ++i) {
      if (i > 0) runs.emplace_back(false, 1);
      runs.emplace_back(true, code[i] == '.' ? 1 : 3);
    }
  }

  const double unit_s = 1.2 / wpm;
  const double unit_samples = unit_s * sample_rate;
  auto at_unit = [&](int u) { return static_cast<std::size_t>(std::llround(u * unit_samples)); };

  CwSignal result{SampleBuffer({0.0}, sample_rate), {}, unit_s, 0};
  int unit = 0;
  for (auto [down, units] : runs) {
    const std::size_t start = at_unit(unit);
    const std::size_t end = at_unit(unit + units);
    result.timeline.push_back({down, units, start, end - start});
    unit += units;
  }
  result.total_units = unit;

  const std::size_t natural = at_unit(unit + 7);
  const std::size_t n = duration_s ? sample_count(*duration_s, sample_rate) : natural;
  std::vector<double> out(n, 0.0);
  const auto ramp_len = static_cast<std::size_t>(std::llround(kCwEdgeSeconds * sample_rate));
  for (const auto& seg : result.timeline) {
    if (!seg.key_down) continue;
    const std::size_t ramp = std::min(ramp_len, seg.length_samples / 2);
    for (std::size_t k = 0; k < seg.length_samples; ++k) {
      const std::size_t i = seg.start_sample + k;
      if (i >= n) break;
      double env = 1.0;
      if (k < ramp) {
        env = 0.5 * (1.0 - std::cos(std::numbers::pi * (k + 0.5) / ramp));
      } else if (k >= seg.length_samples - ramp) {
        const std::size_t r = seg.length_samples - 1 - k;
        env = 0.5 * (1.0 - std::cos(std::numbers::pi * (r + 0.5) / ramp));
      }
      out[i] = amplitude * env * std::sin(carrier_phase(tone_freq, i, sample_rate));
    }
  }
  result.buffer = SampleBuffer(std::move(out), sample_rate);
  return result;
}

// ---- PSK31 ------------------------------------------------------------------

std::size_t psk31_samples_per_symbol(int sample_rate) {
  const auto sps = static_cast<std::size_t>(std::llround(sample_rate / kPsk31Baud));
  require(sps >= 2, "sample rate too low for PSK31");
  return sps;
}

SampleBuffer gen_psk31(std::span<const std::uint8_t> bits, double carrier_freq, int sample_rate,
                       double amplitude) {
  require(!bits.empty(), "PSK31 payload must not be empty");
  require(sample_rate > 0, "sample_rate must be positive");
  require_below_nyquist(carrier_freq, sample_rate, "PSK31 carrier");
  const std::size_t sps = psk31_samples_per_symbol(sample_rate);

  std::vector<double> out(bits.size() * sps);
  double sign = 1.0;  // carrier polarity at the end of the previous symbol
  for (std::size_t s = 0; s < bits.size(); ++s) {
    const bool reverse = bits[s] == 0;
    for (std::size_t k = 0; k < sps; ++k) {
      const std::size_t i = s * sps + k;
      const double env =
          reverse ? sign * std::cos(std::numbers::pi * static_cast<double>(k + 1) / sps) : sign;
      out[i] = amplitude * env * std::sin(carrier_phase(carrier_freq, i, sample_rate));
    }
    if (reverse) sign = -sign;
  }
  return SampleBuffer(std::move(out), sample_rate);
}

// ---- AM / FM / FSK8 ---------------------------------------------------------

SampleBuffer gen_am(double carrier_freq, double mod_freq, double depth, double amplitude,
                    double duration_s, int sample_rate) {
  const std::size_t n = sample_count(duration_s, sample_rate);
  require(depth >= 0.0 && depth <= 1.0, "AM depth must lie in [0, 1]");
  require(mod_freq >= 0.0, "AM modulating frequency must be nonnegative");
  require_below_nyquist(carrier_freq + mod_freq, sample_rate, "AM upper sideband");
  require(amplitude >= 0.0, "amplitude must be nonnegative");
  const double norm = 1.0 / (1.0 + depth);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double env = 1.0 + depth * std::sin(carrier_phase(mod_freq, i, sample_rate));
    out[i] = amplitude * norm * env * std::sin(carrier_phase(carrier_freq, i, sample_rate));
  }
  return SampleBuffer(std::move(out), sample_rate);
}

SampleBuffer gen_fm(double carrier_freq, double mod_freq, double deviation, double amplitude,
                    double duration_s, int sample_rate) {
  const std::size_t n = sample_count(duration_s, sample_rate);
  require(deviation >= 0.0, "FM deviation must be nonnegative");
  require(deviation == 0.0 || mod_freq > 0.0, "FM with deviation needs a positive mod_freq");
  require(carrier_freq - deviation >= 0.0, "FM swing must stay above 0 Hz");
  require_below_nyquist(carrier_freq + deviation, sample_rate, "FM upper swing");
  require(amplitude >= 0.0, "amplitude must be nonnegative");
  const double index = deviation == 0.0 ? 0.0 : deviation / mod_freq;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = amplitude * std::sin(carrier_phase(carrier_freq, i, sample_rate) +
                                  index * std::sin(carrier_phase(mod_freq, i, sample_rate)));
  }
  return SampleBuffer(std::move(out), sample_rate);
}

SampleBuffer gen_fsk8(std::span<const int> symbols, double base_freq, double spacing, double baud,
                      int sample_rate, double amplitude) {
  require(!symbols.empty(), "FSK8 payload must not be empty");
  require(baud > 0.0 && spacing >= 0.0, "FSK8 baud must be positive and spacing nonnegative");
  require(sample_rate > 0, "sample_rate must be positive");
  require_below_nyquist(base_freq, sample_rate, "FSK8 base frequency");
  require_below_nyquist(base_freq + 7 * spacing, sample_rate, "FSK8 top tone");
  const auto sps = static_cast<std::size_t>(std::llround(sample_rate / baud));
  require(sps >= 1, "FSK8 baud too high for sample rate");

  std::vector<double> out(symbols.size() * sps);
  double phase = 0.0;
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    require(symbols[s] >= 0 && symbols[s] <= 7, "FSK8 symbol must lie in 0..7");
    const double step = kTwoPi * (base_freq + symbols[s] * spacing) / sample_rate;
    for (std::size_t k = 0; k < sps; ++k) {
      out[s * sps + k] = amplitude * std::sin(phase);
      phase = std::fmod(phase + step, kTwoPi);
    }
  }
  return SampleBuffer(std::move(out), sample_rate);
}

SampleBuffer gen_noise(double sigma, double duration_s, int sample_rate, std::uint64_t seed) {
  const std::size_t n = sample_count(duration_s, sample_rate);
  require(sigma >= 0.0, "noise sigma must be nonnegative");
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& v : out) v = sigma * rng.gaussian();
  return SampleBuffer(std::move(out), sample_rate);
}

// ---- impairments ------------------------------------------------------------

SampleBuffer add_awgn(const SampleBuffer& buf, double snr_db, std::uint64_t seed) {
  require(std::isfinite(snr_db), "snr_db must be finite");
  const double p_signal = buf.power();
  if (p_signal <= 0.0) fail(ErrorKind::Parameter, "cannot add noise at an SNR to a zero-power signal");
  const double sigma = std::sqrt(p_signal / std::pow(10.0, snr_db / 10.0));
  Rng rng(seed);
  std::vector<double> out(buf.vector());
  for (double& v : out) v += sigma * rng.gaussian();
  return SampleBuffer(std::move(out), buf.sample_rate());
}

SampleBuffer apply_drift(const SampleBuffer& buf, double drift_hz_per_s) {
  require(std::isfinite(drift_hz_per_s), "drift must be finite");
  if (drift_hz_per_s == 0.0) return buf;

  const std::size_t n = buf.size();
  std::vector<detail::Complex> x(buf.samples().begin(), buf.samples().end());
  auto spectrum = detail::cfft(x, false);
  // analytic signal: keep DC (and Nyquist), double positive bins, drop negative
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (k < (n + 1) / 2) {
      spectrum[k] *= 2.0;
    } else if (!(n % 2 == 0 && k == half)) {
      spectrum[k] = 0.0;
    }
  }
  const auto analytic = detail::cfft(spectrum, true);
  std::vector<double> out(n);
  const double sr = buf.sample_rate();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sr;
    const double phi = std::numbers::pi * drift_hz_per_s * t * t;
    out[i] = (analytic[i] * std::polar(1.0, phi)).real();
  }
  return SampleBuffer(std::move(out), buf.sample_rate());
}

// ---- spec-driven synthesis --------------------------------------------------

SignalSpec make_signal_spec(SignalClass signal_class, double duration_s, int sample_rate,
                            SnrSetting snr_db, std::uint64_t seed) {
  sample_count(duration_s, sample_rate);
  SignalSpec spec;
  spec.signal_class = signal_class;
  spec.duration_s = duration_s;
  spec.sample_rate = sample_rate;
  spec.snr_db = snr_db;
  spec.seed = seed;

  // Parameter ranges scale with the sample rate so any rate >= 4 kHz is valid.
  Rng rng(derive_seed(seed, 0));
  const double ny = nyquist(sample_rate);
  auto& p = spec.params;
  p.amplitude = 0.5;
  switch (signal_class) {
    case SignalClass::CW: {
      static constexpr std::string_view alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
      p.wpm = static_cast<double>(rng.integer(15, 30));
      p.tone_hz = rng.uniform(0.1, 0.25) * ny;
      const int chars = static_cast<int>(rng.integer(3, 6));
      for (int i = 0; i < chars; ++i) p.text.push_back(alphabet[rng.below(alphabet.size())]);
      break;
    }
    case SignalClass::AM:
      p.tone_hz = rng.uniform(0.2, 0.5) * ny;
      p.mod_hz = rng.uniform(50.0, 300.0);
      p.depth = rng.uniform(0.3, 0.9);
      break;
    case SignalClass::FM:
      p.tone_hz = rng.uniform(0.2, 0.5) * ny;
      p.mod_hz = rng.uniform(50.0, 300.0);
      p.deviation_hz = rng.uniform(50.0, 300.0);
      break;
    case SignalClass::PSK31: {
      p.tone_hz = rng.uniform(0.2, 0.5) * ny;
      const auto n_bits = static_cast<std::size_t>(std::ceil(duration_s * kPsk31Baud));
      for (std::size_t i = 0; i < n_bits; ++i) p.bits.push_back(static_cast<std::uint8_t>(rng.below(2)));
      break;
    }
    case SignalClass::FSK8: {
      p.tone_hz = rng.uniform(0.25, 0.5) * ny;
      p.spacing_hz = 6.25;
      p.baud = 6.25;
      const auto n_sym = static_cast<std::size_t>(std::ceil(duration_s * p.baud));
      for (std::size_t i = 0; i < n_sym; ++i) p.symbols.push_back(static_cast<int>(rng.below(8)));
      break;
    }
    case SignalClass::NOISE:
      p.noise_sigma = 0.3;
      break;
  }
  return spec;
}

SampleBuffer render_clean(const SignalSpec& spec) {
  const auto& p = spec.params;
  const std::size_t n = sample_count(spec.duration_s, spec.sample_rate);
  auto fitted = [&](const SampleBuffer& b) {
    return SampleBuffer(fit_length(b.vector(), n), spec.sample_rate);
  };
  switch (spec.signal_class) {
    case SignalClass::CW:
      return gen_cw(p.text, p.wpm, p.tone_hz, spec.sample_rate, spec.duration_s, p.amplitude).buffer;
    case SignalClass::AM:
      return gen_am(p.tone_hz, p.mod_hz, p.depth, p.amplitude, spec.duration_s, spec.sample_rate);
    case SignalClass::FM:
      return gen_fm(p.tone_hz, p.mod_hz, p.deviation_hz, p.amplitude, spec.duration_s,
                    spec.sample_rate);
    case SignalClass::PSK31:
      return fitted(gen_psk31(p.bits, p.tone_hz, spec.sample_rate, p.amplitude));
    case SignalClass::FSK8:
      return fitted(gen_fsk8(p.symbols, p.tone_hz, p.spacing_hz, p.baud, spec.sample_rate,
                             p.amplitude));
    case SignalClass::NOISE:
      return gen_noise(p.noise_sigma, spec.duration_s, spec.sample_rate, derive_seed(spec.seed, 2));
  }
  fail(ErrorKind::Internal, "unhandled signal class");
}

std::uint64_t noise_seed(const SignalSpec& spec) noexcept { return derive_seed(spec.seed, 1); }

SampleBuffer render(const SignalSpec& spec) {
  auto clean = render_clean(spec);
  if (!spec.snr_db) return clean;
  return add_awgn(clean, *spec.snr_db, noise_seed(spec));
}

}  // namespace hamnet
