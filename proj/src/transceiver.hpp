// Learned transmitter/receiver pair plus the symbol-level bookkeeping around
// them: hard decisions, confusion counts, bit mappings, BER and Q^2.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nn.hpp"
#include "rng.hpp"

namespace ganlink::transceiver {

using nn::DenseNet;
using nn::Matrix;

struct TransceiverConfig {
  int symbol_count = 8;       // S, messages are 1..S
  int samples_per_symbol = 6; // n

  int hidden_width() const { return 2 * symbol_count * samples_per_symbol; }
  void validate() const;  // throws ConfigError
};

// one-hot(S) -> ReLU(2Sn) -> ReLU(2Sn) -> n bounded to (0, 1).
DenseNet make_transmitter(const TransceiverConfig& cfg, Rng& rng);
// n -> ReLU(2Sn) -> ReLU(2Sn) -> softmax over S.
DenseNet make_receiver(const TransceiverConfig& cfg, Rng& rng);

// Symbols are 1-based; out must have symbol_count entries.
void one_hot(int symbol, int symbol_count, std::span<double> out);
Matrix one_hot_rows(std::span<const int> symbols, int symbol_count);

// Row s-1 holds the n-sample waveform for symbol s.
Matrix tx_waveforms(const DenseNet& tx, int symbol_count);
// Concatenated sample stream for a symbol sequence.
std::vector<double> tx_encode(const DenseNet& tx, std::span<const int> symbols, int symbol_count);

// One row of class probabilities per received block.
Matrix rx_probabilities(const DenseNet& rx, const Matrix& blocks);
// Returns the 1-based symbol; ties resolve to the lowest index.
int argmax_decision(std::span<const double> probs);
std::vector<int> decide(const DenseNet& rx, const Matrix& blocks);

// counts(i, j) = how often symbol i+1 was sent and j+1 decided.
Matrix confusion_matrix(std::span<const int> truth, std::span<const int> decisions,
                        int symbol_count);
double symbol_error_rate(const Matrix& confusion);

// Assignment of a distinct log2(S)-bit codeword to each symbol.
struct BitMapping {
  int bits_per_symbol = 0;
  std::vector<uint32_t> codewords;  // codewords[s-1] belongs to symbol s

  static BitMapping natural(int symbol_count);
};

// BER implied by a confusion matrix under a given mapping:
// sum conf(i,j) * hamming(cw_i, cw_j) / (bits * total).
double compute_ber(const Matrix& confusion, const BitMapping& mapping);

// Picks the codeword assignment minimizing compute_ber. Exhaustive for
// S <= 8 (first permutation in lexicographic order wins ties); pairwise-swap
// descent from the natural mapping for larger alphabets.
BitMapping optimize_bit_mapping(const Matrix& confusion);

// Inverse complementary error function for y in (0, 2).
double erfcinv(double y);

// Q^2 [dB] = 20 log10(sqrt(2) erfcinv(2 BER)). +inf at BER 0, NaN at
// BER >= 0.5 (no positive-threshold equivalent exists there).
double q2_from_ber(double ber);
double ber_from_q2(double q2_db);

}  // namespace ganlink::transceiver
