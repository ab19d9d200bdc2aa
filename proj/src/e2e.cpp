#include "e2e.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

#include "errors.hpp"

namespace ganlink::e2e {

int LoopConfig::effective_q() const {
  const int64_t total = static_cast<int64_t>(sequences) * messages_per_sequence;
  return static_cast<int>(std::min<int64_t>(q, total / 10));
}

void LoopConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (sequences < 1) throw ConfigError("sequences must be >= 1");
  if (messages_per_sequence < 4) throw ConfigError("messages_per_sequence must be >= 4");
  if (q < 2) throw ConfigError("q must be >= 2");
  if (inner_transceiver_steps < 1) throw ConfigError("inner_transceiver_steps must be >= 1");
  if (transceiver_lr <= 0.0) throw ConfigError("transceiver_lr must be positive");
  transceiver.validate();
  gan.validate();
  if (gan.samples_per_symbol != transceiver.samples_per_symbol)
    throw ConfigError("gan and transceiver disagree on samples_per_symbol");
  const int h = (gan.memory - 1) / 2;
  if (static_cast<int64_t>(sequences) * messages_per_sequence <= effective_q() + 2 * h + 2)
    throw ConfigError("transmission too short for the held-out block and window memory");
  if (messages_per_sequence < effective_q() + 2 * h + 2)
    throw ConfigError("first sequence too short to hold the q held-out pairs");
}

Eigen::Index TransmissionData::total_symbols() const {
  Eigen::Index total = 0;
  for (const auto& seq : sequences) total += std::ssize(seq.messages);
  return total;
}

TransmissionData transmit_and_measure(const DenseNet& tx, const ForwardOracle& oracle,
                                      int sequences, int messages_per_sequence, int symbol_count,
                                      Rng& rng, uint64_t& stream_counter) {
  if (sequences < 1 || messages_per_sequence < 1)
    throw UsageError("transmit_and_measure: need at least one sequence and message");
  const int n = oracle.samples_per_symbol();
  if (tx.output_width() != n)
    throw ShapeError("transmit_and_measure: transmitter output does not match the oracle");

  TransmissionData data;
  data.sequences.resize(static_cast<size_t>(sequences));
  for (auto& seq : data.sequences) {
    seq.messages.resize(static_cast<size_t>(messages_per_sequence));
    for (auto& m : seq.messages)
      m = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(symbol_count)));

    const auto stream = transceiver::tx_encode(tx, seq.messages, symbol_count);
    const auto received = oracle.transmit(stream, stream_counter++);

    seq.tx.resize(messages_per_sequence, n);
    seq.rx.resize(messages_per_sequence, n);
    for (int r = 0; r < messages_per_sequence; ++r) {
      for (int c = 0; c < n; ++c) {
        seq.tx(r, c) = stream[static_cast<size_t>(r * n + c)];
        seq.rx(r, c) = received[static_cast<size_t>(r * n + c)];
      }
    }
  }
  return data;
}

EvalResult evaluate(const DenseNet& rx, const TransmissionData& data, int symbol_count) {
  if (data.sequences.empty()) throw UsageError("evaluate: no transmission data");
  EvalResult result;
  result.confusion = Matrix::Zero(symbol_count, symbol_count);
  for (const auto& seq : data.sequences) {
    const auto decisions = transceiver::decide(rx, seq.rx);
    result.confusion += transceiver::confusion_matrix(seq.messages, decisions, symbol_count);
  }
  result.mapping = transceiver::optimize_bit_mapping(result.confusion);
  result.ser = transceiver::symbol_error_rate(result.confusion);
  result.ber = transceiver::compute_ber(result.confusion, result.mapping);
  result.q2_db = transceiver::q2_from_ber(result.ber);
  return result;
}

MessageTriples held_out_triples(const TransmissionData& data, int q) {
  if (data.sequences.empty()) throw UsageError("held_out_triples: no transmission data");
  const auto& messages = data.sequences.front().messages;
  if (std::ssize(messages) < q + 1 || q < 2)
    throw UsageError("held_out_triples: first sequence shorter than q + 1");
  MessageTriples rows;
  rows.prev.reserve(static_cast<size_t>(q - 1));
  rows.center.reserve(static_cast<size_t>(q - 1));
  rows.next.reserve(static_cast<size_t>(q - 1));
  for (int i = 1; i < q; ++i) {  // 1-based rows 2..q: boundary row 1 has no left neighbor
    rows.prev.push_back(messages[static_cast<size_t>(i - 1)]);
    rows.center.push_back(messages[static_cast<size_t>(i)]);
    rows.next.push_back(messages[static_cast<size_t>(i + 1)]);
  }
  return rows;
}

double transceiver_update_through_generator(DenseNet& tx, DenseNet& rx, const DenseNet& generator,
                                            const MessageTriples& rows, int inner_steps, double lr,
                                            nn::AdamState& tx_adam, nn::AdamState& rx_adam,
                                            int symbol_count, Rng& rng) {
  const Eigen::Index b = rows.rows();
  if (b == 0) throw UsageError("transceiver update: no message rows");
  if (inner_steps < 1) throw UsageError("transceiver update: inner_steps must be >= 1");
  const int n = tx.output_width();
  if (generator.output_width() != n)
    throw ShapeError("transceiver update: generator block width does not match the transmitter");
  const int latent = generator.input_width() - 3 * n;
  if (latent != 3 * n)
    throw ShapeError("transceiver update: generator expects a different window size");

  // Stacked one-hot inputs: rows [0,b) prev, [b,2b) center, [2b,3b) next.
  Matrix onehots(3 * b, symbol_count);
  onehots.topRows(b) = transceiver::one_hot_rows(rows.prev, symbol_count);
  onehots.middleRows(b, b) = transceiver::one_hot_rows(rows.center, symbol_count);
  onehots.bottomRows(b) = transceiver::one_hot_rows(rows.next, symbol_count);
  const Matrix labels = onehots.middleRows(b, b);

  nn::AlignedVector tx_grads(static_cast<size_t>(tx.param_count()));
  nn::AlignedVector rx_grads(static_cast<size_t>(rx.param_count()));
  nn::AlignedVector gen_scratch(static_cast<size_t>(generator.param_count()));

  double loss = std::numeric_limits<double>::quiet_NaN();
  for (int step = 0; step < inner_steps; ++step) {
    nn::ForwardCache tx_cache;
    const Matrix blocks = tx.forward(onehots, &tx_cache);
    Matrix windows(b, 3 * n);
    windows.leftCols(n) = blocks.topRows(b);
    windows.middleCols(n, n) = blocks.middleRows(b, b);
    windows.rightCols(n) = blocks.bottomRows(b);

    // One latent draw per row, held fixed through this step's forward/backward.
    nn::ForwardCache gen_cache;
    const Matrix fake =
        gan::generator_forward_batch(generator, windows, gan::draw_latents(b, latent, rng), &gen_cache);

    nn::ForwardCache rx_cache;
    const Matrix probs = rx.forward(fake, &rx_cache);
    loss = nn::batch_cross_entropy(labels, probs);
    if (!std::isfinite(loss))
      throw NumericError("non-finite surrogate-update loss at inner step " + std::to_string(step));

    Matrix d_fake;
    std::fill(rx_grads.begin(), rx_grads.end(), 0.0);
    rx.backward_pre(rx_cache, nn::softmax_xent_grad_pre(labels, probs), rx_grads, &d_fake);

    Matrix d_gen_input;
    std::fill(gen_scratch.begin(), gen_scratch.end(), 0.0);  // generator stays frozen
    generator.backward(gen_cache, d_fake, gen_scratch, &d_gen_input);
    const Matrix d_windows = d_gen_input.rightCols(3 * n);

    Matrix d_blocks(3 * b, n);
    d_blocks.topRows(b) = d_windows.leftCols(n);
    d_blocks.middleRows(b, b) = d_windows.middleCols(n, n);
    d_blocks.bottomRows(b) = d_windows.rightCols(n);
    std::fill(tx_grads.begin(), tx_grads.end(), 0.0);
    tx.backward(tx_cache, d_blocks, tx_grads);

    nn::adam_step(tx_adam, tx.params(), tx_grads, lr);
    nn::adam_step(rx_adam, rx.params(), rx_grads, lr);
  }
  return loss;
}

double receiver_only_update(DenseNet& rx, std::span<const int> messages, const Matrix& received,
                            int steps, double lr, nn::AdamState& rx_adam, int symbol_count) {
  if (messages.empty()) throw UsageError("receiver_only_update: no pairs");
  if (std::ssize(messages) != received.rows())
    throw ShapeError("receiver_only_update: message/block count mismatch");
  if (steps < 1) throw UsageError("receiver_only_update: steps must be >= 1");

  const Matrix labels = transceiver::one_hot_rows(messages, symbol_count);
  nn::AlignedVector grads(static_cast<size_t>(rx.param_count()));
  double loss = std::numeric_limits<double>::quiet_NaN();
  for (int step = 0; step < steps; ++step) {
    nn::ForwardCache cache;
    const Matrix probs = rx.forward(received, &cache);
    loss = nn::batch_cross_entropy(labels, probs);
    if (!std::isfinite(loss))
      throw NumericError("non-finite receiver-only loss at step " + std::to_string(step));
    std::fill(grads.begin(), grads.end(), 0.0);
    rx.backward_pre(cache, nn::softmax_xent_grad_pre(labels, probs), grads);
    nn::adam_step(rx_adam, rx.params(), grads, lr);
  }
  return loss;
}

ExperimentState make_initial_state(DenseNet tx, DenseNet rx, const LoopConfig& cfg,
                                   const ForwardOracle& oracle) {
  cfg.validate();
  ExperimentState state;
  state.transmitter = std::move(tx);
  state.receiver = std::move(rx);
  state.tx_adam = nn::AdamState(state.transmitter.param_count());
  state.rx_adam = nn::AdamState(state.receiver.param_count());
  state.rng = Rng(cfg.seed);

  state.pending = transmit_and_measure(state.transmitter, oracle, cfg.sequences,
                                       cfg.messages_per_sequence, cfg.transceiver.symbol_count,
                                       state.rng, state.stream_counter);
  const EvalResult eval = evaluate(state.receiver, state.pending, cfg.transceiver.symbol_count);
  MetricsRecord record;
  record.k = 0;
  record.ser = eval.ser;
  record.ber = eval.ber;
  record.q2_db = eval.q2_db;
  record.gan_d_loss = std::numeric_limits<double>::quiet_NaN();
  record.gan_g_loss = std::numeric_limits<double>::quiet_NaN();
  record.seed = cfg.seed;
  state.history.push_back(record);
  return state;
}

MetricsRecord run_iteration(ExperimentState& state, const LoopConfig& cfg,
                            const ForwardOracle& oracle, int k) {
  if (state.history.empty()) throw UsageError("run_iteration: state not initialized");
  const auto started = std::chrono::steady_clock::now();
  const ExperimentState snapshot = state;  // rollback point

  const char* stage = "dataset";
  try {
    const int q = cfg.effective_q();
    const auto dataset = gan::build_conditioning_dataset(state.pending.sequences, cfg.gan.memory, q);

    stage = "gan-training";
    gan::GanConfig gan_cfg = cfg.gan;  // first iteration has nothing to warm from
    gan_cfg.warm_start = cfg.gan.warm_start && state.surrogate.has_value();
    auto trained = gan::train_gan(dataset, gan_cfg, state.rng,
                                  state.surrogate ? &*state.surrogate : nullptr);
    state.surrogate = std::move(trained.pair);
    const gan::StepLosses last = trained.history.back();

    stage = "transceiver-update";
    const auto rows = held_out_triples(state.pending, q);
    transceiver_update_through_generator(state.transmitter, state.receiver,
                                         state.surrogate->generator, rows,
                                         cfg.inner_transceiver_steps, cfg.transceiver_lr,
                                         state.tx_adam, state.rx_adam,
                                         cfg.transceiver.symbol_count, state.rng);

    stage = "transmission";
    state.pending = transmit_and_measure(state.transmitter, oracle, cfg.sequences,
                                         cfg.messages_per_sequence, cfg.transceiver.symbol_count,
                                         state.rng, state.stream_counter);

    stage = "evaluation";
    const EvalResult eval = evaluate(state.receiver, state.pending, cfg.transceiver.symbol_count);

    MetricsRecord record;
    record.k = k;
    record.ser = eval.ser;
    record.ber = eval.ber;
    record.q2_db = eval.q2_db;
    record.gan_d_loss = last.d_loss;
    record.gan_g_loss = last.g_loss;
    record.seed = cfg.seed;
    record.wallclock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    state.history.push_back(record);
    return record;
  } catch (const std::exception& e) {
    state = snapshot;
    throw TrainingError("iteration " + std::to_string(k) + " failed in stage '" + stage +
                        "': " + e.what());
  }
}

}  // namespace ganlink::e2e
