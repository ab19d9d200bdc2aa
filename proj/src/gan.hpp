// Conditional GAN surrogate of the link: windowed dataset construction, the
// generator/discriminator pair, the adversarial losses, and the 4:1 training
// schedule with a stepped generator learning rate.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nn.hpp"
#include "oracle.hpp"
#include "rng.hpp"

namespace ganlink::gan {

using nn::DenseNet;
using nn::Matrix;

struct GanConfig {
  int memory = 3;              // m, odd window length in symbols
  int samples_per_symbol = 6;  // n
  int batch_size = 1000;       // B
  int64_t total_steps = 10000;
  int d_updates_per_step = 4;
  double d_learning_rate = 1e-3;
  double g_lr_start = 5e-4;
  double g_lr_end = 1e-5;
  int64_t g_lr_interval = 200;
  bool warm_start = false;

  int window_width() const { return memory * samples_per_symbol; }
  int latent_width() const { return memory * samples_per_symbol; }
  void validate() const;  // throws ConfigError
};

// Windowed training set plus the q symbol/received pairs held out for
// transceiver updates.
struct ConditioningDataset {
  Matrix windows;  // rows x m*n, (x_{i-1}, x_i, x_{i+1}) for m = 3
  Matrix targets;  // rows x n, received block y_i
  std::vector<int> messages;  // q held-out messages (A)
  Matrix received;            // q x n held-out received blocks (B)

  Eigen::Index rows() const { return windows.rows(); }
};

// One transmission, viewed per symbol: messages[t] produced tx.row(t) and
// came back as rx.row(t).
struct SymbolBlocks {
  std::vector<int> messages;
  Matrix tx;  // T x n
  Matrix rx;  // T x n
};

// Rows i in {q+1+h, ..., T-h} (1-based, h = (m-1)/2): window is the
// concatenation of tx rows i-h..i+h, target is rx row i. The first q pairs
// become the held-out (messages, received) block.
ConditioningDataset build_conditioning_dataset(const SymbolBlocks& blocks, int memory, int q);

// Aggregates several transmissions: held-out pairs are the first q symbols of
// the first sequence; every sequence contributes its interior windows (edge
// symbols of each sequence are excluded, and the held-out prefix of the first).
ConditioningDataset build_conditioning_dataset(std::span<const SymbolBlocks> sequences, int memory,
                                               int q);

struct GanPair {
  DenseNet generator;      // 2mn -> ReLU(30n, 20n, 13n, 8n, 5n) -> Linear n
  DenseNet discriminator;  // (m+1)n -> ReLU(16n, 10n, 6n) -> Softmax 2
};

GanPair make_gan_pair(const GanConfig& cfg, Rng& rng);

// Latent rows z ~ U(0,1)^cols.
Matrix draw_latents(Eigen::Index rows, int cols, Rng& rng);

// Feeds the concatenation (z, window) per row; returns one fake block per row.
Matrix generator_forward_batch(const DenseNet& generator, const Matrix& windows, const Matrix& z,
                               nn::ForwardCache* cache = nullptr);
// Single-window convenience drawing its own z.
std::vector<double> generator_forward(const DenseNet& generator, std::span<const double> window,
                                      Rng& rng);

// Discriminator input rows are (block, window) concatenations.
Matrix discriminator_input(const Matrix& blocks, const Matrix& windows);

// Real rows are labeled (0,1), fake rows (1,0).
// L_D = (1/B) sum [l((0,1), p_real) + l((1,0), p_fake)]
double discriminator_loss(const Matrix& p_real, const Matrix& p_fake);
// L_G = (1/B) sum l((0,1), p_fake)
double generator_loss(const Matrix& p_fake);

// Piecewise-constant geometric decay from g_lr_start to exactly g_lr_end,
// stepped every g_lr_interval steps.
double g_lr_schedule(int64_t step, const GanConfig& cfg);

struct StepLosses {
  double d_loss = 0.0;
  double g_loss = 0.0;
};

struct GanTrainState {
  nn::AdamState g_adam;
  nn::AdamState d_adam;
};

// d_updates_per_step discriminator updates (fresh batch each, lr
// d_learning_rate), then one generator update at g_lr_schedule(step).
// Returned losses are the ones observed on the final batches before their
// updates. Throws NumericError tagged with the step on non-finite losses.
StepLosses gan_train_step(GanPair& pair, GanTrainState& state, const ConditioningDataset& data,
                          int64_t step, const GanConfig& cfg, Rng& rng);

struct TrainResult {
  GanPair pair;
  std::vector<StepLosses> history;
};

TrainResult train_gan(const ConditioningDataset& data, const GanConfig& cfg, Rng& rng,
                      const GanPair* initial = nullptr);

// --- generator fidelity -----------------------------------------------------

// Energy distance (V-statistic) between two row-sample sets:
// 2 E|X-Y| - E|X-X'| - E|Y-Y'|.
double energy_distance(const Matrix& a, const Matrix& b);

// Distribution of split-half energy distances within one sample set; the
// requested percentile is the same-distribution reference level.
double split_half_distance_percentile(const Matrix& pooled, int permutations, double percentile,
                                      Rng& rng);

struct FidelityReport {
  std::vector<double> window_distance;  // per probe window
  double mean_distance = 0.0;
  double max_distance = 0.0;
  std::vector<double> mean_delta;  // per sample position, generator - oracle
  std::vector<double> std_delta;
};

// Compares `draws` generator samples against `draws` oracle transmissions of
// each probe window (the target block is the window's middle symbol).
FidelityReport validate_generator(const DenseNet& generator, const ForwardOracle& oracle,
                                  const Matrix& probe_windows, int draws, uint64_t seed);

}  // namespace ganlink::gan
