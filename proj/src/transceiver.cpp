#include "transceiver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "errors.hpp"

namespace ganlink::transceiver {

using nn::Activation;
using nn::LayerSpec;

void TransceiverConfig::validate() const {
  if (symbol_count < 2) throw ConfigError("symbol_count must be >= 2");
  if (!std::has_single_bit(static_cast<unsigned>(symbol_count)))
    throw ConfigError("symbol_count must be a power of two");
  if (samples_per_symbol < 1) throw ConfigError("samples_per_symbol must be >= 1");
}

DenseNet make_transmitter(const TransceiverConfig& cfg, Rng& rng) {
  cfg.validate();
  const int h = cfg.hidden_width();
  const LayerSpec specs[] = {
      {cfg.symbol_count, h, Activation::kRelu},
      {h, h, Activation::kRelu},
      {h, cfg.samples_per_symbol, Activation::kBoundedUnit},
  };
  return DenseNet::create(specs, rng);
}

DenseNet make_receiver(const TransceiverConfig& cfg, Rng& rng) {
  cfg.validate();
  const int h = cfg.hidden_width();
  const LayerSpec specs[] = {
      {cfg.samples_per_symbol, h, Activation::kRelu},
      {h, h, Activation::kRelu},
      {h, cfg.symbol_count, Activation::kSoftmax},
  };
  return DenseNet::create(specs, rng);
}

void one_hot(int symbol, int symbol_count, std::span<double> out) {
  if (symbol < 1 || symbol > symbol_count)
    throw ShapeError("one_hot: symbol outside 1..symbol_count");
  if (std::ssize(out) != symbol_count) throw ShapeError("one_hot: output span has wrong size");
  std::fill(out.begin(), out.end(), 0.0);
  out[static_cast<size_t>(symbol - 1)] = 1.0;
}

Matrix one_hot_rows(std::span<const int> symbols, int symbol_count) {
  Matrix rows = Matrix::Zero(std::ssize(symbols), symbol_count);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const int s = symbols[static_cast<size_t>(r)];
    if (s < 1 || s > symbol_count) throw ShapeError("one_hot_rows: symbol outside 1..symbol_count");
    rows(r, s - 1) = 1.0;
  }
  return rows;
}

Matrix tx_waveforms(const DenseNet& tx, int symbol_count) {
  std::vector<int> all(static_cast<size_t>(symbol_count));
  std::iota(all.begin(), all.end(), 1);
  return tx.forward(one_hot_rows(all, symbol_count));
}

std::vector<double> tx_encode(const DenseNet& tx, std::span<const int> symbols, int symbol_count) {
  const Matrix blocks = tx.forward(one_hot_rows(symbols, symbol_count));
  std::vector<double> stream(static_cast<size_t>(blocks.rows() * blocks.cols()));
  for (Eigen::Index r = 0; r < blocks.rows(); ++r) {
    for (Eigen::Index c = 0; c < blocks.cols(); ++c) {
      stream[static_cast<size_t>(r * blocks.cols() + c)] = blocks(r, c);
    }
  }
  return stream;
}

Matrix rx_probabilities(const DenseNet& rx, const Matrix& blocks) { return rx.forward(blocks); }

int argmax_decision(std::span<const double> probs) {
  if (probs.empty()) throw ShapeError("argmax_decision: empty probabilities");
  size_t best = 0;
  for (size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;  // strict: ties keep the lowest index
  }
  return static_cast<int>(best) + 1;
}

std::vector<int> decide(const DenseNet& rx, const Matrix& blocks) {
  const Matrix probs = rx_probabilities(rx, blocks);
  std::vector<int> out(static_cast<size_t>(probs.rows()));
  std::vector<double> row(static_cast<size_t>(probs.cols()));
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    for (Eigen::Index c = 0; c < probs.cols(); ++c) row[static_cast<size_t>(c)] = probs(r, c);
    out[static_cast<size_t>(r)] = argmax_decision(row);
  }
  return out;
}

Matrix confusion_matrix(std::span<const int> truth, std::span<const int> decisions,
                        int symbol_count) {
  if (truth.size() != decisions.size())
    throw ShapeError("confusion_matrix: truth/decision length mismatch");
  Matrix counts = Matrix::Zero(symbol_count, symbol_count);
  for (size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int d = decisions[i];
    if (t < 1 || t > symbol_count || d < 1 || d > symbol_count)
      throw ShapeError("confusion_matrix: symbol outside 1..symbol_count");
    counts(t - 1, d - 1) += 1.0;
  }
  return counts;
}

double symbol_error_rate(const Matrix& confusion) {
  const double total = confusion.sum();
  if (total <= 0.0) throw UsageError("symbol_error_rate: empty confusion matrix");
  return 1.0 - confusion.trace() / total;
}

BitMapping BitMapping::natural(int symbol_count) {
  if (symbol_count < 2 || !std::has_single_bit(static_cast<unsigned>(symbol_count)))
    throw ConfigError("BitMapping: symbol_count must be a power of two >= 2");
  BitMapping m;
  m.bits_per_symbol = std::countr_zero(static_cast<unsigned>(symbol_count));
  m.codewords.resize(static_cast<size_t>(symbol_count));
  for (int s = 0; s < symbol_count; ++s) m.codewords[static_cast<size_t>(s)] = static_cast<uint32_t>(s);
  return m;
}

namespace {

double mapping_cost(const Matrix& confusion, std::span<const uint32_t> codewords) {
  double bad_bits = 0.0;
  const Eigen::Index s = confusion.rows();
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) {
      if (i == j) continue;
      bad_bits += confusion(i, j) *
                  std::popcount(codewords[static_cast<size_t>(i)] ^ codewords[static_cast<size_t>(j)]);
    }
  }
  return bad_bits;
}

}  // namespace

double compute_ber(const Matrix& confusion, const BitMapping& mapping) {
  if (confusion.rows() != confusion.cols()) throw ShapeError("compute_ber: confusion must be square");
  if (std::ssize(mapping.codewords) != confusion.rows())
    throw ShapeError("compute_ber: mapping size does not match confusion matrix");
  const double total = confusion.sum();
  if (total <= 0.0) throw UsageError("compute_ber: empty confusion matrix");
  return mapping_cost(confusion, mapping.codewords) / (mapping.bits_per_symbol * total);
}

BitMapping optimize_bit_mapping(const Matrix& confusion) {
  if (confusion.rows() != confusion.cols() || confusion.rows() < 2)
    throw ShapeError("optimize_bit_mapping: confusion must be square, at least 2x2");
  const int s = static_cast<int>(confusion.rows());
  BitMapping best = BitMapping::natural(s);

  if (s <= 8) {
    std::vector<uint32_t> perm = best.codewords;  // starts sorted
    std::vector<uint32_t> winner = perm;
    double best_cost = mapping_cost(confusion, perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
      const double cost = mapping_cost(confusion, perm);
      if (cost < best_cost) {  // strict: earlier lexicographic order wins ties
        best_cost = cost;
        winner = perm;
      }
    }
    best.codewords = winner;
    return best;
  }

  // Larger alphabets: pairwise-swap descent.
  double cost = mapping_cost(confusion, best.codewords);
  bool improved = true;
  while (improved) {
    improved = false;
    for (size_t i = 0; i + 1 < best.codewords.size(); ++i) {
      for (size_t j = i + 1; j < best.codewords.size(); ++j) {
        std::swap(best.codewords[i], best.codewords[j]);
        const double trial = mapping_cost(confusion, best.codewords);
        if (trial < cost) {
          cost = trial;
          improved = true;
        } else {
          std::swap(best.codewords[i], best.codewords[j]);
        }
      }
    }
  }
  return best;
}

double erfcinv(double y) {
  if (!(y > 0.0 && y < 2.0)) throw UsageError("erfcinv: argument must lie in (0, 2)");
  if (y == 1.0) return 0.0;
  const bool flip = y > 1.0;
  const double target = flip ? 2.0 - y : y;  // (0, 1)

  // Tail seed erfc(x) ~ exp(-x^2)/(x
  // sqrt(pi)) collapses to sqrt(-log(target)); Newton does the rest.
  double x = std::sqrt(std::max(-std::log(target), 1e-12));
  for (int i = 0; i < 100; ++i) {
    const double err = std::erfc(x) - target;
    const double slope = -2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x);
    const double step = err / slope;
    x -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return flip ? -x : x;
}

double q2_from_ber(double ber) {
  if (ber < 0.0 || ber > 1.0) throw UsageError("q2_from_ber: BER must lie in [0, 1]");
  if (ber == 0.0) return std::numeric_limits<double>::infinity();
  if (ber >= 0.5) return std::numeric_limits<double>::quiet_NaN();
  return 20.0 * std::log10(std::numbers::sqrt2 * erfcinv(2.0 * ber));
}

double ber_from_q2(double q2_db) {
  const double q = std::pow(10.0, q2_db / 20.0);
  return 0.5 * std::erfc(q / std::numbers::sqrt2);
}

}  // namespace ganlink::transceiver
