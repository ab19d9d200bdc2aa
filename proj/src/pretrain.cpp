#include "pretrain.hpp"

#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace ganlink::pretrain {

using nn::Matrix;

void PretrainConfig::validate() const {
  transceiver.validate();
  channel.validate();
  if (noise_scale < 0.0) throw ConfigError("pretrain noise_scale must be non-negative");
  if (steps < 1) throw ConfigError("pretrain steps must be >= 1");
  if (batch_symbols < 2) throw ConfigError("pretrain batch_symbols must be >= 2");
  if (learning_rate <= 0.0) throw ConfigError("pretrain learning_rate must be positive");
  if (!(target_ser > 0.0 && target_ser <= 1.0))
    throw ConfigError("pretrain target_ser must lie in (0, 1]");
  if (eval_symbols < 10) throw ConfigError("pretrain eval_symbols must be >= 10");
}

namespace {

std::vector<int> random_messages(int count, int symbol_count, Rng& rng) {
  std::vector<int> m(static_cast<size_t>(count));
  for (auto& v : m) v = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(symbol_count)));
  return m;
}

std::vector<double> flatten_rows(const Matrix& blocks) {
  std::vector<double> stream(static_cast<size_t>(blocks.rows() * blocks.cols()));
  for (Eigen::Index r = 0; r < blocks.rows(); ++r) {
    for (Eigen::Index c = 0; c < blocks.cols(); ++c) {
      stream[static_cast<size_t>(r * blocks.cols() + c)] = blocks(r, c);
    }
  }
  return stream;
}

Matrix rows_from(std::span<const double> stream, Eigen::Index rows, Eigen::Index cols) {
  Matrix blocks(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      blocks(r, c) = stream[static_cast<size_t>(r * cols + c)];
    }
  }
  return blocks;
}

}  // namespace

double smooth_model_ser(const DenseNet& tx, const DenseNet& rx,
                        const channel::SmoothImdd& model, int symbols, int symbol_count,
                        Rng& rng) {
  const auto messages = random_messages(symbols, symbol_count, rng);
  const auto stream = transceiver::tx_encode(tx, messages, symbol_count);
  const auto received = model.forward(stream, rng);
  const int n = tx.output_width();
  const auto decisions = transceiver::decide(rx, rows_from(received, symbols, n));
  return transceiver::symbol_error_rate(
      transceiver::confusion_matrix(messages, decisions, symbol_count));
}

PretrainResult pretrain_transceiver(const PretrainConfig& cfg, Rng& rng) {
  cfg.validate();
  const int s = cfg.transceiver.symbol_count;
  const int n = cfg.transceiver.samples_per_symbol;
  const channel::SmoothImdd model(cfg.channel, cfg.noise_scale);

  PretrainResult result;
  result.tx = transceiver::make_transmitter(cfg.transceiver, rng);
  result.rx = transceiver::make_receiver(cfg.transceiver, rng);
  nn::AdamState tx_adam(result.tx.param_count());
  nn::AdamState rx_adam(result.rx.param_count());
  nn::AlignedVector tx_grads(static_cast<size_t>(result.tx.param_count()));
  nn::AlignedVector rx_grads(static_cast<size_t>(result.rx.param_count()));
  result.loss_curve.reserve(static_cast<size_t>(cfg.steps));

  for (int step = 0; step < cfg.steps; ++step) {
    const auto messages = random_messages(cfg.batch_symbols, s, rng);
    const Matrix labels = transceiver::one_hot_rows(messages, s);

    nn::ForwardCache tx_cache;
    const Matrix sent = result.tx.forward(labels, &tx_cache);

    channel::SmoothImdd::Cache link_cache;
    const auto received = model.forward(flatten_rows(sent), rng, &link_cache);

    nn::ForwardCache rx_cache;
    const Matrix probs =
        result.rx.forward(rows_from(received, cfg.batch_symbols, n), &rx_cache);
    const double loss = nn::batch_cross_entropy(labels, probs);
    if (!std::isfinite(loss))
      throw NumericError("non-finite pretraining loss at step " + std::to_string(step));
    result.loss_curve.push_back(loss);

    Matrix d_received;
    std::fill(rx_grads.begin(), rx_grads.end(), 0.0);
    result.rx.backward_pre(rx_cache, nn::softmax_xent_grad_pre(labels, probs), rx_grads,
                           &d_received);
    const auto d_stream = model.backward(link_cache, flatten_rows(d_received));
    std::fill(tx_grads.begin(), tx_grads.end(), 0.0);
    result.tx.backward(tx_cache, rows_from(d_stream, cfg.batch_symbols, n), tx_grads);

    nn::adam_step(tx_adam, result.tx.params(), tx_grads, cfg.learning_rate);
    nn::adam_step(rx_adam, result.rx.params(), rx_grads, cfg.learning_rate);
  }

  result.final_ser = smooth_model_ser(result.tx, result.rx, model, cfg.eval_symbols, s, rng);
  if (result.final_ser >= cfg.target_ser) {
    std::ostringstream msg;
    msg << "pretraining missed its target: SER " << result.final_ser << " >= " << cfg.target_ser
        << " after " << cfg.steps << " steps (loss " << result.loss_curve.front() << " -> "
        << result.loss_curve.back() << ")";
    throw TrainingError(msg.str());
  }
  return result;
}

}  // namespace ganlink::pretrain
