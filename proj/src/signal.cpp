#include "hamnet/signal.hpp"

#include <cmath>
#include <string>

#include "hamnet/error.hpp"

namespace hamnet {

SampleBuffer::SampleBuffer(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  require(sample_rate_ > 0, "sample_rate must be positive, got " + std::to_string(sample_rate_));
  require(!samples_.empty(), "sample buffer must hold at least one sample");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      fail(ErrorKind::Parameter, "non-finite sample at index " + std::to_string(i));
    }
  }
}

double SampleBuffer::power() const noexcept { return mean_power(samples_); }

double mean_power(std::span<const double> x) noexcept {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

}  // namespace hamnet
