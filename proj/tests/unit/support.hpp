#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "hamnet/dsp.hpp"
#include "hamnet/signal.hpp"

namespace hamnet::test {

/// Fresh, empty directory under the system temp dir; removed by the destructor.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// |H(f)| in dB of an FIR evaluated by direct DTFT sum.
double dtft_gain_db(const std::vector<double>& taps, double freq, int sample_rate);

/// Frame-summed spectrogram peak frequency in Hz.
double peak_hz(const SampleBuffer& buf);

double rms(std::span<const double> x);

}  // namespace hamnet::test
