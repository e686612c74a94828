#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hamnet/dsp.hpp"
#include "hamnet/signal.hpp"

namespace hamnet {

// ---- signal metrics -------------------------------------------------------

struct SnrImprovement {
  double input_db = 0.0;
  double output_db = 0.0;
  double delta_db = 0.0;
};

SnrImprovement snr_improvement(const SampleBuffer& clean, const SampleBuffer& noisy, const SampleBuffer& denoised);

/// Mean squared difference of linear magnitudes; geometries must match.
double spectrogram_mse(const Spectrogram& a, const Spectrogram& b);

// ---- decoders ---------------------------------------------------------------

inline constexpr double kCwWindowSeconds = 0.010;
/// Envelopes whose 90th/10th percentile energy ratio falls below this are
/// treated as unkeyed (pure noise has a ratio near 22).
inline constexpr double kCwMinContrast = 100.0;

struct CwDecodeResult {
  std::string text;
  bool keying_detected = false;
};

/// Goertzel envelope over 10 ms windows, midpoint threshold between the 10th
/// and 90th percentile energies, run lengths quantised to 1/3/7 Morse units.
CwDecodeResult decode_cw(const SampleBuffer& buf, double wpm, double tone_freq);

/// Differential decision on complex symbol correlations at the known carrier.
/// Correlation windows are one symbol long and centred on symbol ends, where
/// the keyed envelope is flat; the first half symbol is the phase reference.
std::vector<std::uint8_t> decode_psk31(const SampleBuffer& buf, double carrier_freq);

/// Hamming distance over tx length; rx bits missing at the end count as errors.
double ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

// ---- classification -----------------------------------------------------------

struct ClassificationMetrics {
  std::vector<std::string> classes;
  double accuracy = 0.0;
  std::vector<double> precision, recall, f1;  // per class, 0/0 := 0
  std::vector<std::size_t> support;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]

  nlohmann::ordered_json to_json() const;
  static ClassificationMetrics from_json(const nlohmann::ordered_json& j);
  friend bool operator==(const ClassificationMetrics&, const ClassificationMetrics&) = default;
};

ClassificationMetrics classification_report(std::span<const std::string> predictions,
                                            std::span<const std::string> labels,
                                            std::span<const std::string> class_set);

// ---- reports --------------------------------------------------------------

struct RecordMetrics {
  std::string id;
  std::string signal_class;
  std::optional<double> input_snr_db, output_snr_db, snr_improvement_db;
  std::optional<double> spectrogram_mse_noisy, spectrogram_mse_denoised;
  std::optional<double> ber_before, ber_after;
  std::optional<std::string> true_label, predicted_label;
  std::optional<double> score;

  friend bool operator==(const RecordMetrics&, const RecordMetrics&) = default;
};

struct AggregateMetrics {
  std::size_t records = 0;
  std::optional<double> input_snr_db, output_snr_db, snr_improvement_db;
  std::optional<double> spectrogram_mse_noisy, spectrogram_mse_denoised;
  std::optional<double> mse_improved_fraction;
  std::optional<double> ber_before, ber_after;
  std::optional<ClassificationMetrics> classification;

  friend bool operator==(const AggregateMetrics&, const AggregateMetrics&) = default;
};

struct EvalReport {
  std::string task;  // classify | denoise
  std::string model_hash;
  std::string manifest_hash;
  nlohmann::ordered_json config;
  std::string generated_at;  // the only field allowed to differ between identical runs
  std::vector<RecordMetrics> records;
  AggregateMetrics aggregate;

  /// Means over records where each metric is present.
  void recompute_aggregate();

  nlohmann::ordered_json to_json() const;
  static EvalReport from_json(const nlohmann::ordered_json& j);
  std::string to_markdown() const;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

enum class ReportFormat { Json, Markdown };
ReportFormat parse_report_format(std::string_view name);

void emit_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format);

}  // namespace hamnet
