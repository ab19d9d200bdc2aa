#include "channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "fft.hpp"

namespace ganlink::channel {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kTinyStd = 1e-12;

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Population std of an already centered sequence.
double centered_std(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

}  // namespace

double ChannelConfig::beta2() const {
  return -dispersion * wavelength * wavelength / (2.0 * std::numbers::pi * kSpeedOfLight);
}

void ChannelConfig::validate() const {
  if (samples_per_symbol < 1) throw ConfigError("samples_per_symbol must be >= 1");
  if (dac_rate <= 0.0) throw ConfigError("dac_rate must be positive");
  if (lpf_bandwidth <= 0.0) throw ConfigError("lpf_bandwidth must be positive");
  if (lpf_bandwidth * 2.0 > dac_rate)
    throw ConfigError("lpf_bandwidth exceeds the Nyquist frequency of dac_rate");
  if (fiber_length < 0.0) throw ConfigError("fiber_length must be non-negative");
  if (wavelength <= 0.0) throw ConfigError("wavelength must be positive");
  if (dac_bits < 1 || dac_bits > 24) throw ConfigError("dac_bits must be in [1, 24]");
  if (adc_bits < 1 || adc_bits > 24) throw ConfigError("adc_bits must be in [1, 24]");
  if (adc_clip_sigmas <= 0.0) throw ConfigError("adc_clip_sigmas must be positive");
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be non-negative");
}

std::vector<double> lpf(std::span<const double> x, double bandwidth, double sample_rate) {
  if (x.empty()) throw UsageError("lpf: empty input");
  const size_t n = x.size();
  std::vector<std::complex<double>> buf(n);
  for (size_t i = 0; i < n; ++i) buf[i] = x[i];
  auto spectrum = fft(buf);
  for (size_t k = 0; k < n; ++k) {
    if (std::abs(bin_frequency(k, n, sample_rate)) > bandwidth) spectrum[k] = 0.0;
  }
  auto filtered = ifft(spectrum);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = filtered[i].real();
  return out;
}

std::vector<double> quantize(std::span<const double> x, int bits, double lo, double hi) {
  if (bits < 1 || bits > 24) throw UsageError("quantize: bits must be in [1, 24]");
  if (!(lo < hi)) throw UsageError("quantize: need lo < hi");
  const double levels = static_cast<double>(int64_t{1} << bits);
  const double step = (hi - lo) / levels;
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double k = std::floor((x[i] - lo) / step);
    k = std::clamp(k, 0.0, levels - 1.0);
    out[i] = lo + (k + 0.5) * step;
  }
  return out;
}

std::vector<double> mzm_modulate(std::span<const double> drive) {
  std::vector<double> out(drive.size());
  for (size_t i = 0; i < drive.size(); ++i) {
    const double u = std::clamp(drive[i], 0.0, 1.0);
    out[i] = std::sin(0.5 * std::numbers::pi * u);
  }
  return out;
}

std::vector<std::complex<double>> fiber_dispersion(std::span<const std::complex<double>> field,
                                                   double beta2, double length,
                                                   double sample_rate) {
  if (field.empty()) throw UsageError("fiber_dispersion: empty input");
  const size_t n = field.size();
  auto spectrum = fft(field);
  for (size_t k = 0; k < n; ++k) {
    const double w = 2.0 * std::numbers::pi * bin_frequency(k, n, sample_rate);
    const double phase = 0.5 * beta2 * w * w * length;
    spectrum[k] *= std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return ifft(spectrum);
}

std::vector<double> photodetect(std::span<const std::complex<double>> field, double noise_sigma,
                                Rng& rng) {
  if (field.empty()) throw UsageError("photodetect: empty input");
  std::vector<double> out(field.size());
  for (size_t i = 0; i < field.size(); ++i) {
    out[i] = std::norm(field[i]) + noise_sigma * rng.gaussian();
  }
  const double m = mean_of(out);  // AC coupling
  for (double& v : out) v -= m;
  return out;
}

std::vector<double> awgn_forward(std::span<const double> x, double sigma, Rng& rng) {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] + sigma * rng.gaussian();
  return out;
}

ImddOracle::ImddOracle(const ChannelConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

std::vector<double> ImddOracle::transmit(std::span<const double> tx_samples,
                                         uint64_t stream_index) const {
  if (tx_samples.empty()) throw ShapeError("ImddOracle: empty transmit stream");
  Rng rng(derive_seed(cfg_.seed, stream_index));

  auto drive = lpf(tx_samples, cfg_.lpf_bandwidth, cfg_.dac_rate);
  drive = quantize(drive, cfg_.dac_bits, 0.0, 1.0);
  auto amplitude = mzm_modulate(drive);

  std::vector<std::complex<double>> field(amplitude.begin(), amplitude.end());
  field = fiber_dispersion(field, cfg_.beta2(), cfg_.fiber_length, cfg_.dac_rate);

  auto y = photodetect(field, cfg_.noise_sigma, rng);

  const double sigma_y = centered_std(y);
  if (sigma_y > kTinyStd) {
    const double clip = cfg_.adc_clip_sigmas * sigma_y;
    y = quantize(y, cfg_.adc_bits, -clip, clip);
  }

  // Scaling and offset correction: the receiver sees a zero-mean,
  // unit-variance sequence regardless of link loss.
  const double m = mean_of(y);
  for (double& v : y) v -= m;
  const double s = centered_std(y);
  if (s > kTinyStd) {
    for (double& v : y) v /= s;
  }
  return y;
}

AwgnOracle::AwgnOracle(int samples_per_symbol, double sigma, uint64_t seed)
    : n_(samples_per_symbol), sigma_(sigma), seed_(seed) {
  if (n_ < 1) throw ConfigError("AwgnOracle: samples_per_symbol must be >= 1");
  if (sigma_ < 0.0) throw ConfigError("AwgnOracle: sigma must be non-negative");
}

std::vector<double> AwgnOracle::transmit(std::span<const double> tx_samples,
                                         uint64_t stream_index) const {
  if (tx_samples.empty()) throw ShapeError("AwgnOracle: empty transmit stream");
  Rng rng(derive_seed(seed_, stream_index));
  return awgn_forward(tx_samples, sigma_, rng);
}

SmoothImdd::SmoothImdd(const ChannelConfig& cfg, double noise_scale) : cfg_(cfg) {
  cfg_.validate();
  if (noise_scale < 0.0) throw ConfigError("SmoothImdd: noise_scale must be non-negative");
  noise_sigma_ = noise_scale * cfg_.noise_sigma;
}

std::vector<double> SmoothImdd::forward(std::span<const double> tx, Rng& rng,
                                        Cache* cache) const {
  if (tx.empty()) throw ShapeError("SmoothImdd: empty transmit stream");
  const size_t n = tx.size();

  auto filtered = lpf(tx, cfg_.lpf_bandwidth, cfg_.dac_rate);

  std::vector<std::complex<double>> field(n);
  for (size_t i = 0; i < n; ++i) field[i] = std::sin(0.5 * std::numbers::pi * filtered[i]);
  auto dispersed = fiber_dispersion(field, cfg_.beta2(), cfg_.fiber_length, cfg_.dac_rate);

  std::vector<double> detected(n);
  for (size_t i = 0; i < n; ++i) {
    detected[i] = std::norm(dispersed[i]) + noise_sigma_ * rng.gaussian();
  }
  const double m = mean_of(detected);
  std::vector<double> centered(n);
  for (size_t i = 0; i < n; ++i) centered[i] = detected[i] - m;

  double scale = centered_std(centered);
  std::vector<double> out(n);
  if (scale > kTinyStd) {
    for (size_t i = 0; i < n; ++i) out[i] = centered[i] / scale;
  } else {
    scale = 1.0;
    out = centered;
  }

  if (cache != nullptr) {
    cache->filtered = std::move(filtered);
    cache->dispersed = std::move(dispersed);
    cache->centered = centered;
    cache->scale = scale;
    cache->length = n;
  }
  return out;
}

std::vector<double> SmoothImdd::backward(const Cache& cache,
                                         std::span<const double> grad_out) const {
  const size_t n = cache.length;
  if (n == 0 || grad_out.size() != n) throw ShapeError("SmoothImdd::backward: bad cache or gradient size");
  const double inv_n = 1.0 / static_cast<double>(n);

  // out = c / s with s = sqrt(mean(c^2)); ds/dc_j = c_j / (n s).
  const double s = cache.scale;
  double dot = 0.0;
  for (size_t i = 0; i < n; ++i) dot += grad_out[i] * cache.centered[i];
  std::vector<double> g_centered(n);
  for (size_t i = 0; i < n; ++i) {
    g_centered[i] = grad_out[i] / s - dot * cache.centered[i] * inv_n / (s * s * s);
  }

  // c = d - mean(d)
  double gsum = 0.0;
  for (double v : g_centered) gsum += v;
  std::vector<double> g_detected(n);
  for (size_t i = 0; i < n; ++i) g_detected[i] = g_centered[i] - gsum * inv_n;

  // d_i = |E_i|^2 (+ noise, constant in tx)
  std::vector<std::complex<double>> g_field(n);
  for (size_t i = 0; i < n; ++i) g_field[i] = 2.0 * g_detected[i] * cache.dispersed[i];

  // Adjoint of the all-pass filter is the same filter with conjugate phase.
  g_field = fiber_dispersion(g_field, -cfg_.beta2(), cfg_.fiber_length, cfg_.dac_rate);

  // E = sin(pi/2 u), real-valued input: keep the real part of the gradient.
  std::vector<double> g_drive(n);
  for (size_t i = 0; i < n; ++i) {
    g_drive[i] =
        g_field[i].real() * 0.5 * std::numbers::pi * std::cos(0.5 * std::numbers::pi * cache.filtered[i]);
  }

  // Brick-wall projector is self-adjoint.
  return lpf(g_drive, cfg_.lpf_bandwidth, cfg_.dac_rate);
}

}  // namespace ganlink::channel
