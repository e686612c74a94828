#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hamnet/features.hpp"
#include "hamnet/signal.hpp"

namespace hamnet {

enum class FilterKind { Lowpass, Highpass, Bandpass };

std::string_view to_string(FilterKind kind) noexcept;
FilterKind parse_filter_kind(std::string_view name);

/// Linear-phase FIR: odd, symmetric tap vector.
struct FirFilter {
  std::vector<double> taps;
  FilterKind kind = FilterKind::Lowpass;
  std::vector<double> cutoffs_hz;
  int sample_rate = kDefaultSampleRate;
};

/// Hamming-windowed sinc design. Lowpass and highpass take one cutoff,
/// bandpass two. Lowpass has unit DC gain, highpass a DC null, bandpass unit
/// gain at the band centre.
FirFilter design_fir(FilterKind kind, std::span<const double> cutoffs_hz, std::size_t n_taps,
                     int sample_rate);

/// Direct-form convolution with the (n_taps-1)/2 group delay removed; output
/// length equals input length.
SampleBuffer apply_fir(const SampleBuffer& buf, const FirFilter& filter);

// ---- outliers ---------------------------------------------------------------

enum class OutlierMethod { ZScore, Iqr };

std::string_view to_string(OutlierMethod m) noexcept;
OutlierMethod parse_outlier_method(std::string_view name);
double default_outlier_threshold(OutlierMethod m) noexcept;

struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;  // rows[record][feature]
};

FeatureTable make_feature_table(const std::vector<std::string>& ids,
                                const std::vector<FeatureVector>& features);

struct OutlierFlag {
  std::size_t record = 0;
  std::string id;
  std::string feature;
  double value = 0.0;      // z-score or raw value (iqr)
  double lower = 0.0;      // accepted range
  double upper = 0.0;
};

struct OutlierReport {
  OutlierMethod method = OutlierMethod::ZScore;
  double threshold = 0.0;
  std::vector<OutlierFlag> flags;  // one entry per offending (record, feature)

  std::vector<std::string> flagged_ids() const;  // sorted, unique
  nlohmann::ordered_json to_json() const;
};

/// Flags without removing. Needs at least 4 records.
OutlierReport detect_outliers(const FeatureTable& table, OutlierMethod method, double threshold);

/// Quantile with linear interpolation between order statistics (position (n-1)q).
double quantile_linear(std::vector<double> values, double q);

// ---- manifest validation ------------------------------------------------------

struct Violation {
  std::size_t line = 0;
  std::string id;    // empty when the line could not be parsed far enough
  std::string kind;  // malformed | missing_file | length_mismatch | duplicate_id | invalid_label | label_mismatch
  std::string message;
};

struct ValidationReport {
  std::size_t records_checked = 0;
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
};

/// Read-only audit of a manifest against its signal files under data_root.
/// Throws Io only when the manifest itself cannot be read.
ValidationReport validate_manifest(const std::filesystem::path& manifest,
                                   const std::filesystem::path& data_root);

}  // namespace hamnet
