#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "channel.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "rng.hpp"
#include "testutil.hpp"

using namespace ganlink;
using std::numbers::pi;

namespace {

std::vector<double> tone(double freq, double rate, size_t samples) {
  std::vector<double> x(samples);
  for (size_t i = 0; i < samples; ++i) x[i] = std::sin(2.0 * pi * freq * static_cast<double>(i) / rate);
  return x;
}

double power(std::span<const double> x) {
  double p = 0.0;
  for (double v : x) p += v * v;
  return p;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0;
  for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot / std::sqrt(power(a) * power(b));
}

}  // namespace

TEST_CASE("lpf passes DC unchanged") {
  const std::vector<double> x(64, 0.37);
  const auto y = channel::lpf(x, 32e9, 84e9);
  for (double v : y) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("lpf kills a 40 GHz tone behind a 32 GHz cutoff") {
  // 84 samples at 84 GSa/s put both tones exactly on FFT bins.
  const auto in = tone(40e9, 84e9, 84);
  const auto out = channel::lpf(in, 32e9, 84e9);
  CHECK(power(out) < 1e-6 * power(in));
}

TEST_CASE("lpf separates a two-tone mix") {
  const auto low = tone(10e9, 84e9, 84);
  const auto high = tone(40e9, 84e9, 84);
  std::vector<double> mix(84);
  for (size_t i = 0; i < mix.size(); ++i) mix[i] = low[i] + high[i];
  const auto out = channel::lpf(mix, 32e9, 84e9);
  CHECK(correlation(out, low) > 0.999);
}

TEST_CASE("mid-rise quantizer levels") {
  const std::vector<double> in{0.7, 0.2};
  const auto one_bit = channel::quantize(in, 1, 0.0, 1.0);
  CHECK(one_bit[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(one_bit[1] == doctest::Approx(0.25).epsilon(1e-15));

  // Saturation hits the outermost level centers.
  const std::vector<double> wild{1.9, -2.0};
  const auto two_bit = channel::quantize(wild, 2, 0.0, 1.0);
  CHECK(two_bit[0] == doctest::Approx(0.875).epsilon(1e-15));
  CHECK(two_bit[1] == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("16-bit quantization error is bounded by the step") {
  Rng rng(3);
  std::vector<double> x(4096);
  for (auto& v : x) v = rng.uniform();
  const auto y = channel::quantize(x, 16, 0.0, 1.0);
  double worst = 0.0;
  for (size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(y[i] - x[i]));
  CHECK(worst <= 1.0 / 65536.0);
}

TEST_CASE("quantizer rejects an empty range") {
  const std::vector<double> x{0.5};
  CHECK_THROWS_AS(channel::quantize(x, 4, 1.0, 1.0), UsageError);
}

TEST_CASE("mzm null, full swing and quadrature") {
  const std::vector<double> drive{0.0, 1.0, 0.5, -0.3, 1.7};
  const auto e = channel::mzm_modulate(drive);
  CHECK(e[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(e[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e[2] * e[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(e[3] == doctest::Approx(0.0).epsilon(1e-15));  // saturates below 0
  CHECK(e[4] == doctest::Approx(1.0).epsilon(1e-15));  // saturates above 1
}

TEST_CASE("beta2 from the dispersion parameter") {
  channel::ChannelConfig cfg;
  // -D lambda^2 / (2 pi c) at D = 17 ps/(nm km), lambda = 1550 nm.
  CHECK(cfg.beta2() == doctest::Approx(-2.16826e-26).epsilon(1e-4));
}

TEST_CASE("fiber dispersion conserves power and L=0 is identity") {
  Rng rng(5);
  std::vector<std::complex<double>> field(256);
  for (auto& v : field) v = {rng.gaussian(), rng.gaussian()};

  channel::ChannelConfig cfg;
  const auto out = channel::fiber_dispersion(field, cfg.beta2(), cfg.fiber_length, cfg.dac_rate);
  double pin = 0.0, pout = 0.0;
  for (size_t i = 0; i < field.size(); ++i) {
    pin += std::norm(field[i]);
    pout += std::norm(out[i]);
  }
  CHECK(std::abs(pout - pin) <= 1e-9 * pin);

  const auto same = channel::fiber_dispersion(field, cfg.beta2(), 0.0, cfg.dac_rate);
  for (size_t i = 0; i < field.size(); ++i) CHECK(std::abs(same[i] - field[i]) < 1e-12);
}

TEST_CASE("gaussian pulse broadens by the closed-form factor") {
  // Unit-free grid: E(t) = exp(-t^2 / (2 T0^2)) with T0 = 2 samples,
  // beta2 * L = 2 -> T1 = T0 sqrt(1 + (beta2 L / T0^2)^2) = 2 sqrt(1.25).
  const double t0 = 2.0;
  const size_t count = 256;
  const double centre = 128.0;
  std::vector<std::complex<double>> field(count);
  for (size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) - centre;
    field[i] = std::exp(-t * t / (2.0 * t0 * t0));
  }
  const auto out = channel::fiber_dispersion(field, 1.0, 2.0, 1.0);

  double mass = 0.0, mean = 0.0;
  for (size_t i = 0; i < count; ++i) {
    const double inten = std::norm(out[i]);
    mass += inten;
    mean += static_cast<double>(i) * inten;
  }
  mean /= mass;
  double var = 0.0;
  for (size_t i = 0; i < count; ++i) {
    const double d = static_cast<double>(i) - mean;
    var += d * d * std::norm(out[i]);
  }
  var /= mass;
  // Intensity std of a field-width-T pulse is T / sqrt(2).
  const double t1_measured = std::sqrt(2.0 * var);
  const double t1_expected = t0 * std::sqrt(1.0 + std::pow(2.0 / (t0 * t0), 2));
  CHECK(std::abs(t1_measured - t1_expected) <= 0.01 * t1_expected);
}

TEST_CASE("photodetector is a square law with mean removal") {
  std::vector<std::complex<double>> field{{2.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}};
  Rng rng(9);
  const auto y = channel::photodetect(field, 0.0, rng);
  double mean = 0.0;
  for (const auto& e : field) mean += std::norm(e);
  mean /= static_cast<double>(field.size());
  for (size_t i = 0; i < field.size(); ++i)
    CHECK(y[i] == doctest::Approx(std::norm(field[i]) - mean).epsilon(1e-12));
  CHECK(y[0] + mean == doctest::Approx(4.0).epsilon(1e-12));  // |2|^2
}

TEST_CASE("photodetector noise variance matches sigma^2") {
  const size_t count = 1u << 20;
  std::vector<std::complex<double>> field(count, {1.0, 0.0});
  Rng rng(17);
  const double sigma = 0.3;
  const auto y = channel::photodetect(field, sigma, rng);
  // Constant |E|^2 means the output is exactly the centered noise.
  double var = 0.0;
  for (double v : y) var += v * v;
  var /= static_cast<double>(count);
  CHECK(std::abs(var - sigma * sigma) <= 0.02 * sigma * sigma);
}

TEST_CASE("awgn channel statistics") {
  const size_t count = 100000;
  std::vector<double> x(count, 1.25);
  Rng rng(23);
  const double sigma = 0.4;
  const auto y = channel::awgn_forward(x, sigma, rng);

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(count);
  CHECK(std::abs(mean - 1.25) <= 3.0 * sigma / std::sqrt(static_cast<double>(count)));

  double var = 0.0;
  for (size_t i = 0; i < count; ++i) var += (y[i] - x[i]) * (y[i] - x[i]);
  var /= static_cast<double>(count);
  CHECK(std::abs(var - sigma * sigma) <= 0.02 * sigma * sigma);

  Rng quiet(24);
  const auto same = channel::awgn_forward(x, 0.0, quiet);
  for (size_t i = 0; i < 16; ++i) CHECK(same[i] == x[i]);
}

TEST_CASE("imdd output is normalized per sequence") {
  channel::ChannelConfig cfg;
  cfg.seed = 42;
  const channel::ImddOracle oracle(cfg);
  Rng rng(1);
  std::vector<double> tx(6 * 200);
  for (auto& v : tx) v = rng.uniform();

  const auto y = oracle.transmit(tx, 0);
  REQUIRE(y.size() == tx.size());
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  CHECK(std::abs(mean) < 1e-6);
  CHECK(std::abs(var - 1.0) < 1e-6);
}

TEST_CASE("imdd is deterministic per stream index") {
  channel::ChannelConfig cfg;
  cfg.seed = 7;
  const channel::ImddOracle oracle(cfg);
  Rng rng(2);
  std::vector<double> tx(6 * 50);
  for (auto& v : tx) v = rng.uniform();

  const auto a = oracle.transmit(tx, 3);
  const auto b = oracle.transmit(tx, 3);
  const auto c = oracle.transmit(tx, 4);
  CHECK(a == b);
  bool differs = false;
  for (size_t i = 0; i < a.size(); ++i) differs = differs || a[i] != c[i];
  CHECK(differs);
}

TEST_CASE("constant input takes the offset-only fallback") {
  channel::ChannelConfig cfg;
  cfg.noise_sigma = 0.0;
  const channel::ImddOracle oracle(cfg);
  const std::vector<double> tx(6 * 20, 0.5);
  const auto y = oracle.transmit(tx, 0);
  for (double v : y) {
    CHECK(std::isfinite(v));
    CHECK(std::abs(v) < 1e-9);
  }
}

TEST_CASE("back-to-back noiseless link reduces to filtered sin^2") {
  channel::ChannelConfig cfg;
  cfg.fiber_length = 0.0;
  cfg.noise_sigma = 0.0;
  cfg.dac_bits = 16;
  cfg.adc_bits = 16;
  const channel::ImddOracle oracle(cfg);

  Rng rng(11);
  std::vector<double> tx(6 * 100);
  for (auto& v : tx) v = rng.uniform();
  const auto y = oracle.transmit(tx, 0);

  // Reference: z-score of sin^2((pi/2) lpf(u)); converters only add
  // sub-1e-4 wobble at 16 bits.
  const auto filtered = channel::lpf(tx, cfg.lpf_bandwidth, cfg.dac_rate);
  std::vector<double> reference(filtered.size());
  for (size_t i = 0; i < filtered.size(); ++i) {
    const double u = std::clamp(filtered[i], 0.0, 1.0);
    const double e = std::sin(pi / 2.0 * u);
    reference[i] = e * e;
  }
  double mean = 0.0;
  for (double v : reference) mean += v;
  mean /= static_cast<double>(reference.size());
  double var = 0.0;
  for (auto& v : reference) {
    v -= mean;
    var += v * v;
  }
  var /= static_cast<double>(reference.size());
  for (auto& v : reference) v /= std::sqrt(var);

  CHECK(correlation(y, reference) > 0.99999);
}

TEST_CASE("received block depends on its neighbors") {
  channel::ChannelConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.seed = 5;
  const channel::ImddOracle oracle(cfg);
  const int n = cfg.samples_per_symbol;
  const int symbols = 256;
  const int t = 128;

  Rng rng(6);
  std::vector<double> base(static_cast<size_t>(n * symbols));
  for (auto& v : base) v = rng.uniform();

  auto block_delta = [&](int flipped) {
    auto variant = base;
    for (int i = 0; i < n; ++i) {
      auto& v = variant[static_cast<size_t>(flipped * n + i)];
      v = 1.0 - v;
    }
    const auto y0 = oracle.transmit(base, 0);
    const auto y1 = oracle.transmit(variant, 0);
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
      const double diff = y1[static_cast<size_t>(t * n + i)] - y0[static_cast<size_t>(t * n + i)];
      d += diff * diff;
    }
    return d;
  };

  // Flipping a distant symbol only couples through renormalization; that is
  // the floor the neighbor effect has to clear by 10x.
  const double floor_effect = std::max(block_delta(20), 1e-18);
  CHECK(block_delta(t - 1) > 10.0 * floor_effect);
  CHECK(block_delta(t + 1) > 10.0 * floor_effect);
}

TEST_CASE("smooth model gradients match finite differences") {
  channel::ChannelConfig cfg;
  cfg.noise_sigma = 0.08;
  const channel::SmoothImdd model(cfg, 0.25);
  const size_t count = 6 * 8;

  Rng init(12);
  std::vector<double> tx(count);
  for (auto& v : tx) v = init.uniform();
  std::vector<double> coeffs(count);
  for (auto& v : coeffs) v = init.gaussian();

  auto loss_at = [&](std::span<const double> stream) {
    Rng frozen(77);  // identical noise draws on every evaluation
    const auto out = model.forward(stream, frozen);
    double loss = 0.0;
    for (size_t i = 0; i < out.size(); ++i) loss += coeffs[i] * out[i];
    return loss;
  };

  channel::SmoothImdd::Cache cache;
  Rng frozen(77);
  model.forward(tx, frozen, &cache);
  const auto grad = model.backward(cache, coeffs);

  double worst = 0.0;
  for (size_t i = 0; i < count; ++i) {
    auto probe = tx;
    const double h = 1e-6;
    probe[i] = tx[i] + h;
    const double up = loss_at(probe);
    probe[i] = tx[i] - h;
    const double down = loss_at(probe);
    worst = std::max(worst, testutil::rel_err(grad[i], (up - down) / (2.0 * h)));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("config validation polices the sampling theorem") {
  channel::ChannelConfig cfg;
  cfg.lpf_bandwidth = 50e9;  // Nyquist at 84 GSa/s is 42 GHz
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  channel::ChannelConfig bits;
  bits.dac_bits = 0;
  CHECK_THROWS_AS(bits.validate(), ConfigError);

  channel::ChannelConfig neg;
  neg.noise_sigma = -0.1;
  CHECK_THROWS_AS(neg.validate(), ConfigError);
}
