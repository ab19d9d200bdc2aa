// Thin FFTW wrapper: in-order complex DFT of arbitrary length.
#pragma once

#include <complex>
#include <span>
#include <vector>

namespace ganlink {

std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x);
// Inverse transform, normalized by 1/N.
std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> x);

// Signed bin frequency in Hz: k -> k*fs/n for k < n/2, negative alias above.
double bin_frequency(size_t k, size_t n, double sample_rate);

}  // namespace ganlink
