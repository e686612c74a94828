#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hamnet {

inline constexpr int kDefaultSampleRate = 8000;

/// Uniformly sampled, real-valued baseband signal.
///
/// Invariants (checked on construction): sample_rate > 0, at least one
/// sample, every sample finite.
class SampleBuffer {
 public:
  SampleBuffer(std::vector<double> samples, int sample_rate);

  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration_s() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& vector() const noexcept { return samples_; }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }

  /// Mean square value.
  double power() const noexcept;

  friend bool operator==(const SampleBuffer&, const SampleBuffer&) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_;
};

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) noexcept { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

double mean_power(std::span<const double> x) noexcept;

}  // namespace hamnet
