#include "support.hpp"

#include <atomic>
#include <complex>
#include <numbers>

#include <unistd.h>

namespace hamnet::test {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("hamnet_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

double dtft_gain_db(const std::vector<double>& taps, double freq, int sample_rate) {
  std::complex<double> h{0.0, 0.0};
  const double w = 2.0 * std::numbers::pi * freq / sample_rate;
  for (std::size_t n = 0; n < taps.size(); ++n) {
    h += taps[n] * std::exp(std::complex<double>(0.0, -w * static_cast<double>(n)));
  }
  return 20.0 * std::log10(std::abs(h));
}

double peak_hz(const SampleBuffer& buf) {
  const auto spec = stft(buf);
  return static_cast<double>(peak_bin(spec)) * spec.bin_hz();
}

double rms(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace hamnet::test
