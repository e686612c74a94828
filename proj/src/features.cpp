#include "hamnet/features.hpp"

namespace hamnet {

std::vector<std::pair<std::string, double>> FeatureVector::scalars() const {
  std::vector<std::pair<std::string, double>> out = {{"mean", mean},
                                                     {"variance", variance},
                                                     {"skewness", skewness},
                                                     {"kurtosis", kurtosis},
                                                     {"spectral_entropy", spectral_entropy}};
  if (snr_db) out.emplace_back("snr_db", *snr_db);
  for (std::size_t c = 0; c < mfcc.rows; ++c) {
    double acc = 0.0;
    for (std::size_t f = 0; f < mfcc.cols; ++f) acc += mfcc(c, f);
    out.emplace_back("mfcc" + std::to_string(c), mfcc.cols ? acc / mfcc.cols : 0.0);
  }
  return out;
}

FeatureVector extract_features(const SampleBuffer& buf, const std::optional<SampleBuffer>& reference) {
  FeatureVector fv;
  const auto stats = time_stats(buf);
  fv.mean = stats.mean;
  fv.variance = stats.variance;
  fv.skewness = stats.skewness;
  fv.kurtosis = stats.kurtosis;
  const auto spec = stft(buf);
  fv.spectral_entropy = mean_spectral_entropy(spec);
  if (reference) fv.snr_db = estimate_snr(buf, *reference);
  fv.mfcc = mfcc(spec, mel_filterbank(kMelBands, spec.fft_size, buf.sample_rate()));
  return fv;
}

}  // namespace hamnet
