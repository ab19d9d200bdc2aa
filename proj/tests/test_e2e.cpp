#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "channel.hpp"
#include "doctest.h"
#include "e2e.hpp"
#include "errors.hpp"
#include "testutil.hpp"
#include "transceiver.hpp"

using namespace ganlink;
using nn::Matrix;

namespace {

// Small-link config: S = 4 symbols of 4 samples over an additive channel.
transceiver::TransceiverConfig small_tc() {
  transceiver::TransceiverConfig tc;
  tc.symbol_count = 4;
  tc.samples_per_symbol = 4;
  return tc;
}

e2e::LoopConfig small_loop() {
  e2e::LoopConfig cfg;
  cfg.transceiver = small_tc();
  cfg.gan.samples_per_symbol = 4;
  cfg.gan.batch_size = 32;
  cfg.gan.total_steps = 40;
  cfg.sequences = 2;
  cfg.messages_per_sequence = 200;
  cfg.q = 40;
  cfg.iterations = 2;
  return cfg;
}

struct SmallRig {
  nn::DenseNet tx, rx;
  channel::AwgnOracle oracle;

  explicit SmallRig(uint64_t seed, double sigma = 0.05)
      : tx(nn::DenseNet()), rx(nn::DenseNet()), oracle(4, sigma, seed) {
    Rng rng(seed);
    tx = transceiver::make_transmitter(small_tc(), rng);
    rx = transceiver::make_receiver(small_tc(), rng);
  }
};

}  // namespace

TEST_CASE("loop config validation and the held-out cap") {
  e2e::LoopConfig cfg = small_loop();
  CHECK_NOTHROW(cfg.validate());
  // q is capped at 10% of the transmitted symbols.
  CHECK(cfg.effective_q() == 40);
  cfg.q = 4000;
  CHECK(cfg.effective_q() == 40);  // 2 * 200 / 10

  cfg = small_loop();
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_loop();
  cfg.gan.samples_per_symbol = 6;  // disagrees with the transceiver
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_loop();
  cfg.sequences = 1;
  cfg.messages_per_sequence = 4;  // whole transmission fits inside the holdout + window edge
  cfg.q = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_loop();
  cfg.sequences = 10;
  cfg.messages_per_sequence = 4;  // plenty of symbols overall, first sequence too short
  cfg.q = 400;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("transmissions carry aligned tx/rx blocks and uniform messages") {
  SmallRig rig(17);
  Rng rng(17);
  uint64_t streams = 0;
  const auto data = e2e::transmit_and_measure(rig.tx, rig.oracle, 3, 500, 4, rng, streams);

  REQUIRE(std::ssize(data.sequences) == 3);
  CHECK(data.total_symbols() == 1500);
  CHECK(streams == 3);  // one oracle stream per sequence

  std::vector<double> counts(4, 0.0);
  for (const auto& seq : data.sequences) {
    REQUIRE(seq.tx.rows() == 500);
    REQUIRE(seq.tx.cols() == 4);
    REQUIRE(seq.rx.rows() == 500);
    for (const int m : seq.messages) {
      REQUIRE(m >= 1);
      REQUIRE(m <= 4);
      counts[static_cast<size_t>(m - 1)] += 1.0;
    }
    // tx blocks are the transmitter's own encodings, row for row.
    const auto stream = transceiver::tx_encode(rig.tx, seq.messages, 4);
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 4; ++c)
        REQUIRE(seq.tx(r, c) == stream[static_cast<size_t>(r * 4 + c)]);
  }
  // Chi-square against uniform: 3 dof, 16.27 is the 0.1% tail.
  double chi2 = 0.0;
  for (const double c : counts) chi2 += (c - 375.0) * (c - 375.0) / 375.0;
  CHECK(chi2 < 16.27);

  CHECK_THROWS_AS(e2e::transmit_and_measure(rig.tx, rig.oracle, 0, 10, 4, rng, streams),
                  UsageError);
  channel::AwgnOracle wide(6, 0.1, 1);
  CHECK_THROWS_AS(e2e::transmit_and_measure(rig.tx, wide, 1, 10, 4, rng, streams), ShapeError);
}

TEST_CASE("identical seeds give identical transmissions, distinct streams differ") {
  SmallRig rig(23);
  Rng rng_a(5), rng_b(5);
  uint64_t sa = 0, sb = 0;
  const auto a = e2e::transmit_and_measure(rig.tx, rig.oracle, 2, 50, 4, rng_a, sa);
  const auto b = e2e::transmit_and_measure(rig.tx, rig.oracle, 2, 50, 4, rng_b, sb);
  CHECK(a.sequences[0].rx == b.sequences[0].rx);
  CHECK(a.sequences[1].rx == b.sequences[1].rx);
  // The two sequences saw different noise even with identical messages.
  Rng rng_c(5);
  uint64_t sc = 0;
  const auto flat = e2e::transmit_and_measure(rig.tx, rig.oracle, 1, 50, 4, rng_c, sc);
  CHECK(a.sequences[0].rx != a.sequences[1].rx);
  CHECK(flat.sequences[0].rx == a.sequences[0].rx);
}

TEST_CASE("evaluation counts errors over every sequence") {
  SmallRig rig(31, 1e-4);  // essentially noiseless
  Rng rng(31);
  uint64_t streams = 0;
  const auto data = e2e::transmit_and_measure(rig.tx, rig.oracle, 2, 100, 4, rng, streams);
  const auto eval = e2e::evaluate(rig.rx, data, 4);
  CHECK(eval.confusion.sum() == 200.0);
  CHECK(eval.ser >= 0.0);
  CHECK(eval.ser <= 1.0);
  CHECK(eval.ber <= eval.ser);  // a symbol error costs at most every bit
  CHECK_THROWS_AS(e2e::evaluate(rig.rx, e2e::TransmissionData{}, 4), UsageError);
}

TEST_CASE("held-out triples skip the boundary row") {
  SmallRig rig(7);
  Rng rng(7);
  uint64_t streams = 0;
  const auto data = e2e::transmit_and_measure(rig.tx, rig.oracle, 1, 60, 4, rng, streams);
  const auto rows = e2e::held_out_triples(data, 10);
  // Centers are 1-based symbols 2..10: the first pair has no left neighbor.
  REQUIRE(rows.rows() == 9);
  const auto& m = data.sequences.front().messages;
  for (int i = 0; i < 9; ++i) {
    CHECK(rows.prev[static_cast<size_t>(i)] == m[static_cast<size_t>(i)]);
    CHECK(rows.center[static_cast<size_t>(i)] == m[static_cast<size_t>(i + 1)]);
    CHECK(rows.next[static_cast<size_t>(i)] == m[static_cast<size_t>(i + 2)]);
  }
  CHECK_THROWS_AS(e2e::held_out_triples(data, 60), UsageError);
  CHECK_THROWS_AS(e2e::held_out_triples(e2e::TransmissionData{}, 10), UsageError);
}

TEST_CASE("surrogate updates move the transceiver but never the generator") {
  SmallRig rig(41);
  Rng gan_rng(41);
  gan::GanConfig gcfg;
  gcfg.samples_per_symbol = 4;
  auto pair = gan::make_gan_pair(gcfg, gan_rng);

  Rng rng(2);
  uint64_t streams = 0;
  const auto data = e2e::transmit_and_measure(rig.tx, rig.oracle, 1, 60, 4, rng, streams);
  const auto rows = e2e::held_out_triples(data, 20);

  const std::vector<double> gen_before(pair.generator.params().begin(),
                                       pair.generator.params().end());
  const std::vector<double> tx_before(rig.tx.params().begin(), rig.tx.params().end());
  nn::AdamState tx_adam(rig.tx.param_count());
  nn::AdamState rx_adam(rig.rx.param_count());

  const double loss = e2e::transceiver_update_through_generator(
      rig.tx, rig.rx, pair.generator, rows, 1, 1e-3, tx_adam, rx_adam, 4, rng);
  CHECK(std::isfinite(loss));
  CHECK(tx_adam.step_count == 1);
  CHECK(rx_adam.step_count == 1);

  // theta frozen, bit for bit.
  const auto gen_after = pair.generator.params();
  for (size_t i = 0; i < gen_before.size(); ++i) REQUIRE(gen_after[i] == gen_before[i]);
  // Gradients reached the transmitter through the frozen generator.
  double tx_moved = 0.0;
  const auto tx_after = rig.tx.params();
  for (size_t i = 0; i < tx_before.size(); ++i)
    tx_moved = std::max(tx_moved, std::abs(tx_after[i] - tx_before[i]));
  CHECK(tx_moved > 1e-12);

  CHECK_THROWS_AS(e2e::transceiver_update_through_generator(rig.tx, rig.rx, pair.generator,
                                                            e2e::MessageTriples{}, 1, 1e-3,
                                                            tx_adam, rx_adam, 4, rng),
                  UsageError);
}

TEST_CASE("receiver-only updates drive the training loss down") {
  SmallRig rig(53, 0.02);
  Rng rng(53);
  uint64_t streams = 0;
  const auto data = e2e::transmit_and_measure(rig.tx, rig.oracle, 1, 120, 4, rng, streams);
  const auto& seq = data.sequences.front();

  nn::AdamState adam(rig.rx.param_count());
  const Matrix labels = transceiver::one_hot_rows(seq.messages, 4);
  const double before = nn::batch_cross_entropy(labels, rig.rx.forward(seq.rx));
  const double last =
      e2e::receiver_only_update(rig.rx, seq.messages, seq.rx, 400, 3e-3, adam, 4);
  const double after = nn::batch_cross_entropy(labels, rig.rx.forward(seq.rx));
  CHECK(last < before);
  CHECK(after < before);
  CHECK(adam.step_count == 400);
  // A random transmitter leaves some waveforms nearly colliding, so perfect
  // decoding is out of reach; well below the 0.75 random-guess floor is the
  // honest claim (measured 0.17 here).
  const auto eval = e2e::evaluate(rig.rx, data, 4);
  CHECK(eval.ser < 0.35);

  CHECK_THROWS_AS(
      e2e::receiver_only_update(rig.rx, std::span<const int>{}, seq.rx, 1, 1e-3, adam, 4),
      UsageError);
  CHECK_THROWS_AS(
      e2e::receiver_only_update(rig.rx, seq.messages, seq.rx.topRows(5), 1, 1e-3, adam, 4),
      ShapeError);
}

TEST_CASE("the optimization loop learns a low-noise additive link from scratch") {
  e2e::LoopConfig cfg = small_loop();
  cfg.iterations = 6;  // SER hits zero at k = 6 on this seed
  cfg.inner_transceiver_steps = 60;
  cfg.gan.total_steps = 400;
  cfg.gan.batch_size = 64;
  cfg.gan.warm_start = true;
  cfg.seed = 9;

  channel::AwgnOracle oracle(4, 0.02, 9);
  Rng rng(9);
  auto tx = transceiver::make_transmitter(small_tc(), rng);
  auto rx = transceiver::make_receiver(small_tc(), rng);
  auto state = e2e::make_initial_state(std::move(tx), std::move(rx), cfg, oracle);

  REQUIRE(std::ssize(state.history) == 1);
  CHECK(state.history.front().k == 0);
  CHECK(std::isnan(state.history.front().gan_d_loss));

  for (int k = 1; k <= cfg.iterations; ++k) {
    const auto record = e2e::run_iteration(state, cfg, oracle, k);
    CHECK(record.k == k);
    CHECK(std::ssize(state.history) == k + 1);
    CHECK(std::isfinite(record.gan_d_loss));
    CHECK(record.wallclock_s > 0.0);
  }
  // Random-start SER is ~3/4; a near-noiseless link must be learnable.
  CHECK(state.history.front().ser > 0.5);
  CHECK(state.history.back().ser < 0.05);
  CHECK(state.surrogate.has_value());
}

TEST_CASE("failed iterations roll the state back untouched") {
  e2e::LoopConfig cfg = small_loop();
  cfg.seed = 15;
  channel::AwgnOracle oracle(4, 0.05, 15);
  Rng rng(15);
  auto tx = transceiver::make_transmitter(small_tc(), rng);
  auto rx = transceiver::make_receiver(small_tc(), rng);
  auto state = e2e::make_initial_state(std::move(tx), std::move(rx), cfg, oracle);

  auto broken = cfg;
  broken.gan.batch_size = 100000;  // larger than any dataset this loop builds
  const std::vector<double> tx_before(state.transmitter.params().begin(),
                                      state.transmitter.params().end());
  const auto history_before = state.history.size();
  const auto counter_before = state.stream_counter;

  CHECK_THROWS_AS(e2e::run_iteration(state, broken, oracle, 1), TrainingError);

  CHECK(state.history.size() == history_before);
  CHECK(state.stream_counter == counter_before);
  CHECK_FALSE(state.surrogate.has_value());
  const auto tx_after = state.transmitter.params();
  for (size_t i = 0; i < tx_before.size(); ++i) REQUIRE(tx_after[i] == tx_before[i]);

  // The healthy config still works on the rolled-back state.
  CHECK_NOTHROW(e2e::run_iteration(state, cfg, oracle, 1));
  CHECK(state.history.size() == history_before + 1);
}

TEST_CASE("uninitialized state is rejected") {
  e2e::LoopConfig cfg = small_loop();
  channel::AwgnOracle oracle(4, 0.05, 1);
  e2e::ExperimentState state;
  CHECK_THROWS_AS(e2e::run_iteration(state, cfg, oracle, 1), UsageError);
}
