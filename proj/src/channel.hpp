// Software stand-in for an IM/DD fibre link: low-pass filtering, DAC/ADC
// quantization, Mach-Zehnder modulation, chromatic dispersion, square-law
// detection with additive receiver noise, and per-sequence scaling/offset
// correction. Exposed to training code only through ForwardOracle.
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "oracle.hpp"
#include "rng.hpp"

namespace ganlink::channel {

struct ChannelConfig {
  int samples_per_symbol = 6;  // n
  double dac_rate = 84e9;      // samples/second
  double lpf_bandwidth = 32e9; // Hz, single-sided
  double fiber_length = 20e3;  // meters
  double dispersion = 17e-6;   // D, s/m^2 (17 ps/(nm km))
  double wavelength = 1550e-9; // meters
  int dac_bits = 8;
  int adc_bits = 8;
  double adc_clip_sigmas = 4.0;  // ADC clip range as a multiple of signal std
  double noise_sigma = 0.05;     // receiver noise std, post-detection units
  uint64_t seed = 0;

  // beta2 = -D lambda^2 / (2 pi c); anomalous (< 0) for positive D at 1550nm.
  double beta2() const;
  void validate() const;  // throws ConfigError
};

// Brick-wall low-pass: FFT, zero all bins with |f| > bandwidth, inverse FFT.
std::vector<double> lpf(std::span<const double> x, double bandwidth, double sample_rate);

// Uniform mid-rise quantizer, 2^bits levels over [lo, hi]; saturates outside.
std::vector<double> quantize(std::span<const double> x, int bits, double lo, double hi);

// Field amplitude E = sin(pi/2 u) for normalized drive u in [0, 1]
// (saturating); quadrature bias at u = 0.5 where |E|^2 = 0.5.
std::vector<double> mzm_modulate(std::span<const double> drive);

// All-pass quadratic-phase filter H = exp(i beta2/2 w^2 L).
std::vector<std::complex<double>> fiber_dispersion(std::span<const std::complex<double>> field,
                                                   double beta2, double length,
                                                   double sample_rate);

// y = |E|^2 + N(0, sigma^2), then AC-coupling mean removal over the sequence.
std::vector<double> photodetect(std::span<const std::complex<double>> field, double noise_sigma,
                                Rng& rng);

// y = x + N(0, sigma^2) i.i.d.
std::vector<double> awgn_forward(std::span<const double> x, double sigma, Rng& rng);

// Full measured path: lpf -> DAC -> MZM -> fibre -> PIN/TIA -> ADC ->
// scaling and offset correction (zero mean, unit variance per sequence).
class ImddOracle final : public ForwardOracle {
 public:
  explicit ImddOracle(const ChannelConfig& cfg);

  int samples_per_symbol() const override { return cfg_.samples_per_symbol; }
  std::vector<double> transmit(std::span<const double> tx_samples,
                               uint64_t stream_index) const override;

  const ChannelConfig& config() const { return cfg_; }

 private:
  ChannelConfig cfg_;
};

// Memoryless additive-noise channel; used to validate the GAN against a
// known conditional law.
class AwgnOracle final : public ForwardOracle {
 public:
  AwgnOracle(int samples_per_symbol, double sigma, uint64_t seed);

  int samples_per_symbol() const override { return n_; }
  std::vector<double> transmit(std::span<const double> tx_samples,
                               uint64_t stream_index) const override;

 private:
  int n_;
  double sigma_;
  uint64_t seed_;
};

// Quantizer-free variant of the same stage chain with exact reverse-mode
// gradients; only used to pretrain the transceiver offline. Deliberately
// mismatched against ImddOracle (no converters, scaled noise).
class SmoothImdd {
 public:
  struct Cache {
    std::vector<double> filtered;        // post-LPF drive
    std::vector<std::complex<double>> dispersed;
    std::vector<double> centered;        // detected, mean-removed
    double scale = 1.0;                  // std used for normalization
    size_t length = 0;
  };

  SmoothImdd(const ChannelConfig& cfg, double noise_scale);

  std::vector<double> forward(std::span<const double> tx, Rng& rng, Cache* cache = nullptr) const;
  // Gradient of a scalar loss w.r.t. the transmit stream, given the gradient
  // w.r.t. the output stream.
  std::vector<double> backward(const Cache& cache, std::span<const double> grad_out) const;

  const ChannelConfig& config() const { return cfg_; }

 private:
  ChannelConfig cfg_;
  double noise_sigma_;
};

}  // namespace ganlink::channel
