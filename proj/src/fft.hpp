#pragma once

#include <complex>
#include <span>
#include <vector>

namespace hamnet::detail {

using Complex = std::complex<double>;

/// One-sided DFT of a real sequence: n/2 + 1 bins, unnormalised.
std::vector<Complex> rfft(std::span<const double> x);

/// Inverse of rfft for a length-n output; scaled by 1/n so irfft(rfft(x)) == x.
std::vector<double> irfft(std::span<const Complex> spectrum, std::size_t n);

/// Full complex DFT (forward when inverse == false). Inverse is scaled by 1/n.
std::vector<Complex> cfft(std::span<const Complex> x, bool inverse);

}  // namespace hamnet::detail
