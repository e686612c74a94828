#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hamnet/dsp.hpp"

namespace hamnet {

struct FeatureVector {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
  double spectral_entropy = 0.0;
  std::optional<double> snr_db;  // only when a clean reference was supplied
  Matrix mfcc;                   // [13 x frames]

  /// Flat (name, value) view used by outlier detection; MFCCs enter as per-coefficient means.
  std::vector<std::pair<std::string, double>> scalars() const;
};

FeatureVector extract_features(const SampleBuffer& buf,
                               const std::optional<SampleBuffer>& reference = std::nullopt);

}  // namespace hamnet
