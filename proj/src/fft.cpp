#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "errors.hpp"

namespace ganlink {

namespace {
// FFTW's planner is not thread-safe; execution on distinct buffers is.
std::mutex planner_mutex;

std::vector<std::complex<double>> transform(std::span<const std::complex<double>> x, int sign) {
  if (x.empty()) throw UsageError("fft: empty input");
  const auto n = static_cast<int>(x.size());
  std::vector<std::complex<double>> in(x.begin(), x.end());
  std::vector<std::complex<double>> out(x.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(plan);
  }
  return out;
}
}  // namespace

std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x) {
  return transform(x, FFTW_FORWARD);
}

std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> x) {
  auto out = transform(x, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : out) v *= scale;
  return out;
}

double bin_frequency(size_t k, size_t n, double sample_rate) {
  const auto half = n / 2;
  const double idx = (k <= half) ? static_cast<double>(k)
                                 : static_cast<double>(k) - static_cast<double>(n);
  return idx * sample_rate / static_cast<double>(n);
}

}  // namespace ganlink
