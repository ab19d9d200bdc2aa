// Outer optimization loop: transmit through the black-box link, score the
// current pair, retrain the GAN surrogate on the measurements, push the
// transceiver one step through the frozen generator, repeat. Also carries the
// receiver-only update used as the prior-art baseline.
//
// Everything here sees the link exclusively through ForwardOracle.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gan.hpp"
#include "nn.hpp"
#include "oracle.hpp"
#include "rng.hpp"
#include "transceiver.hpp"

namespace ganlink::e2e {

using gan::SymbolBlocks;
using nn::DenseNet;
using nn::Matrix;

struct LoopConfig {
  int iterations = 10;               // K
  int sequences = 20;                // N
  int messages_per_sequence = 2000;  // w
  int q = 1000;                      // held-out pairs per iteration (capped at 10% of N*w)
  int inner_transceiver_steps = 1;
  double transceiver_lr = 1e-3;
  uint64_t seed = 1;
  transceiver::TransceiverConfig transceiver;
  gan::GanConfig gan;

  int effective_q() const;
  void validate() const;  // throws ConfigError
};

struct MetricsRecord {
  int k = 0;
  double ser = 0.0;
  double ber = 0.0;
  double q2_db = 0.0;
  double gan_d_loss = 0.0;  // NaN at k = 0 (no GAN trained yet)
  double gan_g_loss = 0.0;
  double wallclock_s = 0.0;
  uint64_t seed = 0;
};

struct TransmissionData {
  std::vector<SymbolBlocks> sequences;

  Eigen::Index total_symbols() const;
};

struct EvalResult {
  Matrix confusion;
  transceiver::BitMapping mapping;
  double ser = 1.0;
  double ber = 1.0;
  double q2_db = 0.0;
};

struct ExperimentState {
  DenseNet transmitter;
  DenseNet receiver;
  std::optional<gan::GanPair> surrogate;
  std::vector<MetricsRecord> history;
  TransmissionData pending;  // latest measurements, consumed by the next iteration
  nn::AdamState tx_adam, rx_adam;
  Rng rng{0};
  uint64_t stream_counter = 0;
};

// N sequences of w uniform messages, encoded with tx and sent through the
// oracle (one stream index per sequence, taken from stream_counter).
TransmissionData transmit_and_measure(const DenseNet& tx, const ForwardOracle& oracle,
                                      int sequences, int messages_per_sequence, int symbol_count,
                                      Rng& rng, uint64_t& stream_counter);

// Confusion over every symbol of the transmission, mapping optimized on it,
// SER/BER/Q^2 derived from the same counts.
EvalResult evaluate(const DenseNet& rx, const TransmissionData& data, int symbol_count);

// Message triples feeding the surrogate update: the held-out prefix of the
// first sequence minus its boundary (rows 2..q, 1-based, so both neighbors
// exist).
struct MessageTriples {
  std::vector<int> prev, center, next;

  Eigen::Index rows() const { return std::ssize(center); }
};
MessageTriples held_out_triples(const TransmissionData& data, int q);

// `inner_steps` joint Adam updates of tx/rx through the frozen generator:
// windows re-encoded with the current tx each step, one fixed latent draw per
// row per step, loss = mean cross-entropy of rx(G(z, window)) against the
// center message. Returns the last loss.
double transceiver_update_through_generator(DenseNet& tx, DenseNet& rx, const DenseNet& generator,
                                            const MessageTriples& rows, int inner_steps, double lr,
                                            nn::AdamState& tx_adam, nn::AdamState& rx_adam,
                                            int symbol_count, Rng& rng);

// Prior art: full-batch Adam on measured (message, received block) pairs,
// receiver only. Returns the final loss.
double receiver_only_update(DenseNet& rx, std::span<const int> messages, const Matrix& received,
                            int steps, double lr, nn::AdamState& rx_adam, int symbol_count);

// Transmit + evaluate with the given pair and append the k = 0 record.
ExperimentState make_initial_state(DenseNet tx, DenseNet rx, const LoopConfig& cfg,
                                   const ForwardOracle& oracle);

// One loop turn: dataset from the pending measurements -> train_gan ->
// transceiver update -> fresh transmission -> evaluation recorded as step k.
// On any stage failure the state is restored to its entry value and the
// error is rethrown with a stage tag.
MetricsRecord run_iteration(ExperimentState& state, const LoopConfig& cfg,
                            const ForwardOracle& oracle, int k);

}  // namespace ganlink::e2e
