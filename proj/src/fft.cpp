#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "hamnet/error.hpp"

namespace hamnet::detail {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per (kind, size) and kept for the process lifetime.
enum class PlanKind { R2C, C2R, Forward, Backward };

std::mutex plan_mutex;
std::map<std::tuple<PlanKind, std::size_t>, fftw_plan> plan_cache;

fftw_plan get_plan(PlanKind kind, std::size_t n) {
  std::lock_guard lock(plan_mutex);
  auto key = std::make_tuple(kind, n);
  if (auto it = plan_cache.find(key); it != plan_cache.end()) return it->second;

  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  auto* real = fftw_alloc_real(n);
  auto* cplx = fftw_alloc_complex(n);
  fftw_plan plan = nullptr;
  switch (kind) {
    case PlanKind::R2C: plan = fftw_plan_dft_r2c_1d(len, real, cplx, flags); break;
    case PlanKind::C2R: plan = fftw_plan_dft_c2r_1d(len, cplx, real, flags); break;
    case PlanKind::Forward: plan = fftw_plan_dft_1d(len, cplx, cplx, FFTW_FORWARD, flags); break;
    case PlanKind::Backward: plan = fftw_plan_dft_1d(len, cplx, cplx, FFTW_BACKWARD, flags); break;
  }
  fftw_free(real);
  fftw_free(cplx);
  if (!plan) fail(ErrorKind::Internal, "FFT planning failed for size " + std::to_string(n));
  plan_cache.emplace(key, plan);
  return plan;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

std::vector<Complex> rfft(std::span<const double> x) {
  require(!x.empty(), "rfft of empty sequence");
  const std::size_t n = x.size();
  std::vector<double> in(x.begin(), x.end());
  std::vector<Complex> out(n / 2 + 1);
  fftw_execute_dft_r2c(get_plan(PlanKind::R2C, n), in.data(), as_fftw(out.data()));
  return out;
}

std::vector<double> irfft(std::span<const Complex> spectrum, std::size_t n) {
  require(spectrum.size() == n / 2 + 1, "irfft spectrum size does not match output length");
  // c2r destroys its input
  std::vector<Complex> in(spectrum.begin(), spectrum.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(get_plan(PlanKind::C2R, n), as_fftw(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

std::vector<Complex> cfft(std::span<const Complex> x, bool inverse) {
  require(!x.empty(), "cfft of empty sequence");
  const std::size_t n = x.size();
  std::vector<Complex> buf(x.begin(), x.end());
  fftw_execute_dft(get_plan(inverse ? PlanKind::Backward : PlanKind::Forward, n),
                   as_fftw(buf.data()), as_fftw(buf.data()));
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : buf) v *= scale;
  }
  return buf;
}

}  // namespace hamnet::detail
