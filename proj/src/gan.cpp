#include "gan.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "errors.hpp"

namespace ganlink::gan {

using nn::Activation;
using nn::LayerSpec;
using nn::Vector;

void GanConfig::validate() const {
  if (memory < 1 || memory % 2 == 0) throw ConfigError("gan memory must be odd and >= 1");
  if (samples_per_symbol < 1) throw ConfigError("samples_per_symbol must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (total_steps < 1) throw ConfigError("total_steps must be >= 1");
  if (d_updates_per_step < 1) throw ConfigError("d_updates_per_step must be >= 1");
  if (d_learning_rate <= 0.0) throw ConfigError("d_learning_rate must be positive");
  if (g_lr_end <= 0.0 || g_lr_start < g_lr_end)
    throw ConfigError("need g_lr_start >= g_lr_end > 0");
  if (g_lr_interval < 1) throw ConfigError("g_lr_interval must be >= 1");
}

ConditioningDataset build_conditioning_dataset(const SymbolBlocks& blocks, int memory, int q) {
  if (memory < 1 || memory % 2 == 0) throw UsageError("window memory must be odd and >= 1");
  if (q < 0) throw UsageError("q must be non-negative");
  const Eigen::Index t = blocks.tx.rows();
  const Eigen::Index n = blocks.tx.cols();
  if (blocks.rx.rows() != t || blocks.rx.cols() != n)
    throw ShapeError("tx/rx symbol blocks are not aligned");
  if (std::ssize(blocks.messages) != t) throw ShapeError("message count does not match blocks");
  const int h = (memory - 1) / 2;
  if (t < q + 2 * h + 2) throw UsageError("sequence too short for the requested q and memory");

  ConditioningDataset out;
  const Eigen::Index rows = t - q - 2 * h;  // 1-based symbol indices q+1+h .. t-h
  out.windows.resize(rows, memory * n);
  out.targets.resize(rows, n);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index center = q + h + r;  // 0-based
    for (int b = 0; b < memory; ++b) {
      out.windows.row(r).segment(b * n, n) = blocks.tx.row(center - h + b);
    }
    out.targets.row(r) = blocks.rx.row(center);
  }
  out.messages.assign(blocks.messages.begin(), blocks.messages.begin() + q);
  out.received = blocks.rx.topRows(q);
  return out;
}

ConditioningDataset build_conditioning_dataset(std::span<const SymbolBlocks> sequences, int memory,
                                               int q) {
  if (sequences.empty()) throw UsageError("no sequences to build a dataset from");
  ConditioningDataset out = build_conditioning_dataset(sequences[0], memory, q);
  for (size_t s = 1; s < sequences.size(); ++s) {
    ConditioningDataset part = build_conditioning_dataset(sequences[s], memory, 0);
    const Eigen::Index old_rows = out.windows.rows();
    out.windows.conservativeResize(old_rows + part.windows.rows(), Eigen::NoChange);
    out.targets.conservativeResize(old_rows + part.targets.rows(), Eigen::NoChange);
    out.windows.bottomRows(part.windows.rows()) = part.windows;
    out.targets.bottomRows(part.targets.rows()) = part.targets;
  }
  return out;
}

GanPair make_gan_pair(const GanConfig& cfg, Rng& rng) {
  cfg.validate();
  const int n = cfg.samples_per_symbol;
  const int m = cfg.memory;
  const LayerSpec g_specs[] = {
      {2 * m * n, 30 * n, Activation::kRelu}, {30 * n, 20 * n, Activation::kRelu},
      {20 * n, 13 * n, Activation::kRelu},    {13 * n, 8 * n, Activation::kRelu},
      {8 * n, 5 * n, Activation::kRelu},      {5 * n, n, Activation::kLinear},
  };
  const LayerSpec d_specs[] = {
      {(m + 1) * n, 16 * n, Activation::kRelu},
      {16 * n, 10 * n, Activation::kRelu},
      {10 * n, 6 * n, Activation::kRelu},
      {6 * n, 2, Activation::kSoftmax},
  };
  GanPair pair;
  pair.generator = DenseNet::create(g_specs, rng);
  pair.discriminator = DenseNet::create(d_specs, rng);
  // Targets are normalized to unit variance, but Glorot output weights start
  // the fakes near std 0.14; the discriminator separates them on spread alone
  // and the generator stalls. Widening the output layer removes that gap.
  pair.generator.weights(pair.generator.layer_count() - 1) *= 6.0;
  return pair;
}

Matrix draw_latents(Eigen::Index rows, int cols, Rng& rng) {
  Matrix z(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) z(r, c) = rng.uniform();
  }
  return z;
}

Matrix generator_forward_batch(const DenseNet& generator, const Matrix& windows, const Matrix& z,
                               nn::ForwardCache* cache) {
  if (z.rows() != windows.rows()) throw ShapeError("latent/window row mismatch");
  if (z.cols() + windows.cols() != generator.input_width())
    throw ShapeError("latent + window width does not match the generator input");
  Matrix x(windows.rows(), generator.input_width());
  x.leftCols(z.cols()) = z;
  x.rightCols(windows.cols()) = windows;
  return generator.forward(x, cache);
}

std::vector<double> generator_forward(const DenseNet& generator, std::span<const double> window,
                                      Rng& rng) {
  const int latent = generator.input_width() - static_cast<int>(window.size());
  if (latent != static_cast<int>(window.size()))
    throw ShapeError("window length does not match the generator input");
  Matrix w(1, std::ssize(window));
  for (Eigen::Index c = 0; c < w.cols(); ++c) w(0, c) = window[static_cast<size_t>(c)];
  const Matrix out = generator_forward_batch(generator, w, draw_latents(1, latent, rng));
  return std::vector<double>(out.data(), out.data() + out.cols());
}

Matrix discriminator_input(const Matrix& blocks, const Matrix& windows) {
  if (blocks.rows() != windows.rows()) throw ShapeError("block/window row mismatch");
  Matrix x(blocks.rows(), blocks.cols() + windows.cols());
  x.leftCols(blocks.cols()) = blocks;
  x.rightCols(windows.cols()) = windows;
  return x;
}

namespace {

double clamped_log(double p) { return std::log(std::max(p, nn::kLogClamp)); }

void check_probs(const Matrix& p, const char* what) {
  if (p.rows() == 0) throw UsageError(std::string(what) + ": empty batch");
  if (p.cols() != 2) throw ShapeError(std::string(what) + ": expected 2-column probabilities");
}

}  // namespace

double discriminator_loss(const Matrix& p_real, const Matrix& p_fake) {
  check_probs(p_real, "discriminator_loss");
  check_probs(p_fake, "discriminator_loss");
  if (p_real.rows() != p_fake.rows()) throw ShapeError("discriminator_loss: batch size mismatch");
  double loss = 0.0;
  for (Eigen::Index r = 0; r < p_real.rows(); ++r) {
    loss += -clamped_log(p_real(r, 1)) - clamped_log(p_fake(r, 0));
  }
  return loss / static_cast<double>(p_real.rows());
}

double generator_loss(const Matrix& p_fake) {
  check_probs(p_fake, "generator_loss");
  double loss = 0.0;
  for (Eigen::Index r = 0; r < p_fake.rows(); ++r) loss += -clamped_log(p_fake(r, 1));
  return loss / static_cast<double>(p_fake.rows());
}

double g_lr_schedule(int64_t step, const GanConfig& cfg) {
  if (step < 0 || step >= cfg.total_steps) throw UsageError("g_lr_schedule: step out of range");
  const int64_t intervals = (cfg.total_steps + cfg.g_lr_interval - 1) / cfg.g_lr_interval;
  const int64_t idx = step / cfg.g_lr_interval;
  if (idx == 0) return cfg.g_lr_start;
  if (idx >= intervals - 1) return cfg.g_lr_end;
  const double ratio =
      std::pow(cfg.g_lr_end / cfg.g_lr_start, 1.0 / static_cast<double>(intervals - 1));
  return cfg.g_lr_start * std::pow(ratio, static_cast<double>(idx));
}

namespace {

Matrix gather_rows(const Matrix& src, std::span<const Eigen::Index> idx) {
  Matrix out(std::ssize(idx), src.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r) = src.row(idx[static_cast<size_t>(r)]);
  return out;
}

std::vector<Eigen::Index> sample_batch(Eigen::Index rows, int batch, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<size_t>(batch));
  for (auto& i : idx) i = static_cast<Eigen::Index>(rng.below(static_cast<uint64_t>(rows)));
  return idx;
}

}  // namespace

StepLosses gan_train_step(GanPair& pair, GanTrainState& state, const ConditioningDataset& data,
                          int64_t step, const GanConfig& cfg, Rng& rng) {
  if (data.rows() == 0) throw UsageError("gan_train_step: empty dataset");
  const int n = cfg.samples_per_symbol;
  const int b = cfg.batch_size;
  if (data.windows.cols() != cfg.window_width() || data.targets.cols() != n)
    throw ShapeError("gan_train_step: dataset width does not match config");

  StepLosses losses;
  nn::AlignedVector d_grads(static_cast<size_t>(pair.discriminator.param_count()));
  nn::AlignedVector g_grads(static_cast<size_t>(pair.generator.param_count()));

  for (int u = 0; u < cfg.d_updates_per_step; ++u) {
    const auto idx = sample_batch(data.rows(), b, rng);
    const Matrix w = gather_rows(data.windows, idx);
    const Matrix y = gather_rows(data.targets, idx);
    const Matrix fake = generator_forward_batch(pair.generator, w, draw_latents(b, cfg.latent_width(), rng));

    Matrix x(2 * b, (cfg.memory + 1) * n);
    x.topRows(b) = discriminator_input(y, w);
    x.bottomRows(b) = discriminator_input(fake, w);

    nn::ForwardCache cache;
    const Matrix p = pair.discriminator.forward(x, &cache);
    losses.d_loss = discriminator_loss(p.topRows(b), p.bottomRows(b));
    if (!std::isfinite(losses.d_loss))
      throw NumericError("non-finite discriminator loss at gan step " + std::to_string(step));

    Matrix labels = Matrix::Zero(2 * b, 2);
    labels.col(1).head(b).setOnes();  // real: (0,1)
    labels.col(0).tail(b).setOnes();  // fake: (1,0)
    // Eq. (1) averages each of the two terms by B, not 2B.
    const Matrix dz = (p - labels) / static_cast<double>(b);
    std::fill(d_grads.begin(), d_grads.end(), 0.0);
    pair.discriminator.backward_pre(cache, dz, d_grads);
    nn::adam_step(state.d_adam, pair.discriminator.params(), d_grads, cfg.d_learning_rate);
  }

  {
    const auto idx = sample_batch(data.rows(), b, rng);
    const Matrix w = gather_rows(data.windows, idx);
    nn::ForwardCache g_cache;
    const Matrix fake = generator_forward_batch(pair.generator, w,
                                                draw_latents(b, cfg.latent_width(), rng), &g_cache);
    nn::ForwardCache d_cache;
    const Matrix p = pair.discriminator.forward(discriminator_input(fake, w), &d_cache);
    losses.g_loss = generator_loss(p);
    if (!std::isfinite(losses.g_loss))
      throw NumericError("non-finite generator loss at gan step " + std::to_string(step));

    Matrix labels = Matrix::Zero(b, 2);
    labels.col(1).setOnes();  // generator wants fakes judged real
    const Matrix dz = (p - labels) / static_cast<double>(b);
    Matrix d_input_grad;
    std::fill(d_grads.begin(), d_grads.end(), 0.0);  // discarded: discriminator stays frozen
    pair.discriminator.backward_pre(d_cache, dz, d_grads, &d_input_grad);
    std::fill(g_grads.begin(), g_grads.end(), 0.0);
    pair.generator.backward(g_cache, d_input_grad.leftCols(n), g_grads);
    nn::adam_step(state.g_adam, pair.generator.params(), g_grads, g_lr_schedule(step, cfg));
  }
  return losses;
}

TrainResult train_gan(const ConditioningDataset& data, const GanConfig& cfg, Rng& rng,
                      const GanPair* initial) {
  cfg.validate();
  if (data.rows() < cfg.batch_size)
    throw UsageError("train_gan: dataset has fewer rows than one batch");

  TrainResult result;
  if (cfg.warm_start) {
    if (initial == nullptr) throw UsageError("train_gan: warm_start requested without a pair");
    result.pair = *initial;
  } else {
    result.pair = make_gan_pair(cfg, rng);
  }
  GanTrainState state{nn::AdamState(result.pair.generator.param_count()),
                      nn::AdamState(result.pair.discriminator.param_count())};
  result.history.reserve(static_cast<size_t>(cfg.total_steps));
  for (int64_t step = 0; step < cfg.total_steps; ++step) {
    result.history.push_back(gan_train_step(result.pair, state, data, step, cfg, rng));
  }
  return result;
}

namespace {

// Mean pairwise Euclidean distance between row sets, diagonal included when
// a and b alias the same data (V-statistic convention).
double mean_cross_distance(const Matrix& a, const Matrix& b) {
  const Vector an = a.rowwise().squaredNorm();
  const Vector bn = b.rowwise().squaredNorm();
  Matrix d2 = -2.0 * (a * b.transpose());
  d2.colwise() += an;
  d2.rowwise() += bn.transpose();
  double total = 0.0;
  for (Eigen::Index r = 0; r < d2.rows(); ++r) {
    for (Eigen::Index c = 0; c < d2.cols(); ++c) {
      total += std::sqrt(std::max(d2(r, c), 0.0));
    }
  }
  return total / (static_cast<double>(d2.rows()) * static_cast<double>(d2.cols()));
}

}  // namespace

double energy_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0 || b.rows() == 0) throw UsageError("energy_distance: empty sample set");
  if (a.cols() != b.cols()) throw ShapeError("energy_distance: dimension mismatch");
  return 2.0 * mean_cross_distance(a, b) - mean_cross_distance(a, a) - mean_cross_distance(b, b);
}

double split_half_distance_percentile(const Matrix& pooled, int permutations, double percentile,
                                      Rng& rng) {
  if (pooled.rows() < 4) throw UsageError("split_half_distance_percentile: need >= 4 rows");
  if (permutations < 1) throw UsageError("split_half_distance_percentile: need >= 1 permutation");
  const Eigen::Index half = pooled.rows() / 2;
  std::vector<Eigen::Index> order(static_cast<size_t>(pooled.rows()));
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  std::vector<double> dists;
  dists.reserve(static_cast<size_t>(permutations));
  for (int p = 0; p < permutations; ++p) {
    for (size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[rng.below(i + 1)]);
    }
    const Matrix a = gather_rows(pooled, std::span<const Eigen::Index>(order.data(), half));
    const Matrix b = gather_rows(
        pooled, std::span<const Eigen::Index>(order.data() + half, order.size() - half));
    dists.push_back(energy_distance(a, b));
  }
  std::sort(dists.begin(), dists.end());
  const double rank = percentile / 100.0 * static_cast<double>(dists.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(rank));
  const size_t hi = std::min(lo + 1, dists.size() - 1);
  const double frac = rank - std::floor(rank);
  return dists[lo] * (1.0 - frac) + dists[hi] * frac;
}

FidelityReport validate_generator(const DenseNet& generator, const ForwardOracle& oracle,
                                  const Matrix& probe_windows, int draws, uint64_t seed) {
  if (probe_windows.rows() < 100) throw UsageError("validate_generator: need >= 100 probe windows");
  if (draws < 2) throw UsageError("validate_generator: need >= 2 draws");
  const int n = oracle.samples_per_symbol();
  if (probe_windows.cols() % n != 0 || probe_windows.cols() / n % 2 == 0)
    throw ShapeError("validate_generator: windows must span an odd number of symbols");
  const int latent = generator.input_width() - static_cast<int>(probe_windows.cols());
  if (latent != probe_windows.cols())
    throw ShapeError("validate_generator: window width does not match the generator");
  const Eigen::Index mid = (probe_windows.cols() / n) / 2 * n;

  FidelityReport report;
  report.window_distance.reserve(static_cast<size_t>(probe_windows.rows()));
  report.mean_delta.assign(static_cast<size_t>(n), 0.0);
  report.std_delta.assign(static_cast<size_t>(n), 0.0);

  Rng rng(seed);
  std::vector<double> stream(static_cast<size_t>(probe_windows.cols()));
  for (Eigen::Index w_idx = 0; w_idx < probe_windows.rows(); ++w_idx) {
    const Matrix w_rep = probe_windows.row(w_idx).replicate(draws, 1);
    const Matrix gen = generator_forward_batch(generator, w_rep, draw_latents(draws, latent, rng));

    for (Eigen::Index c = 0; c < probe_windows.cols(); ++c)
      stream[static_cast<size_t>(c)] = probe_windows(w_idx, c);
    Matrix real(draws, n);
    for (int d = 0; d < draws; ++d) {
      const auto y = oracle.transmit(stream, static_cast<uint64_t>(w_idx) * draws + d);
      for (int c = 0; c < n; ++c) real(d, c) = y[static_cast<size_t>(mid + c)];
    }

    report.window_distance.push_back(energy_distance(gen, real));
    for (int c = 0; c < n; ++c) {
      const double gm = gen.col(c).mean();
      const double rm = real.col(c).mean();
      const double gs = std::sqrt((gen.col(c).array() - gm).square().mean());
      const double rs = std::sqrt((real.col(c).array() - rm).square().mean());
      report.mean_delta[static_cast<size_t>(c)] += (gm - rm) / probe_windows.rows();
      report.std_delta[static_cast<size_t>(c)] += (gs - rs) / probe_windows.rows();
    }
  }
  report.mean_distance = 0.0;
  report.max_distance = 0.0;
  for (double d : report.window_distance) {
    report.mean_distance += d / static_cast<double>(report.window_distance.size());
    report.max_distance = std::max(report.max_distance, d);
  }
  return report;
}

}  // namespace ganlink::gan
