#include "driver.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "channel.hpp"
#include "checkpoint.hpp"
#include "errors.hpp"
#include "pretrain.hpp"
#include "report.hpp"

namespace ganlink::driver {

namespace {

// Fixed stream tags so every stage draws from an independent, reproducible
// substream of the master seed.
enum : uint64_t {
  kStreamPretrain = 11,
  kStreamChannel = 13,
  kStreamCalibration = 17,
  kStreamEvaluate = 23,
  kStreamBaselineJson = 29,
};

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("short write to '" + path + "'");
}

channel::ImddOracle make_oracle(const config::ExperimentConfig& cfg, double noise_sigma,
                                uint64_t stream) {
  channel::ChannelConfig ch = cfg.channel;
  ch.noise_sigma = noise_sigma;
  ch.seed = derive_seed(cfg.loop.seed, stream);
  return channel::ImddOracle(ch);
}

double probe_ber(const config::ExperimentConfig& cfg, const nn::DenseNet& tx,
                 const nn::DenseNet& rx, double sigma) {
  const channel::ImddOracle oracle = make_oracle(cfg, sigma, kStreamCalibration);
  // Fresh rng and stream counter per probe: identical messages and noise
  // draws for every candidate sigma, so only sigma moves the BER.
  Rng rng(derive_seed(cfg.loop.seed, kStreamCalibration + 1));
  uint64_t streams = 0;
  const auto data =
      e2e::transmit_and_measure(tx, oracle, cfg.calibration.probe_sequences,
                                cfg.loop.messages_per_sequence,
                                cfg.loop.transceiver.symbol_count, rng, streams);
  return e2e::evaluate(rx, data, cfg.loop.transceiver.symbol_count).ber;
}

void save_state_checkpoint(const std::string& path, const e2e::ExperimentState& state) {
  checkpoint::TensorFile file;
  checkpoint::append_net(file, "tx", state.transmitter);
  checkpoint::append_net(file, "rx", state.receiver);
  if (state.surrogate) {
    checkpoint::append_net(file, "gen", state.surrogate->generator);
    checkpoint::append_net(file, "disc", state.surrogate->discriminator);
  }
  checkpoint::save_tensor_file(path, file);
}

}  // namespace

double calibrate_noise(const config::ExperimentConfig& cfg, const nn::DenseNet& tx,
                       const nn::DenseNet& rx) {
  const auto& cal = cfg.calibration;
  cal.validate();

  double lo = cal.sigma_low, hi = cal.sigma_high;
  const double ber_lo_end = probe_ber(cfg, tx, rx, lo);
  if (ber_lo_end >= cal.ber_low && ber_lo_end <= cal.ber_high) return lo;
  const double ber_hi_end = probe_ber(cfg, tx, rx, hi);
  if (ber_hi_end >= cal.ber_low && ber_hi_end <= cal.ber_high) return hi;

  std::ostringstream diag;
  diag << "BER(" << lo << ") = " << ber_lo_end << ", BER(" << hi << ") = " << ber_hi_end;
  if (ber_lo_end > cal.ber_high)
    throw TrainingError("noise calibration: error floor above the band; " + diag.str());
  if (ber_hi_end < cal.ber_low)
    throw TrainingError("noise calibration: bracket too clean for the band; " + diag.str());

  for (int step = 0; step < cal.max_steps; ++step) {
    const double mid = std::sqrt(lo * hi);  // sigma spans decades: bisect in log
    const double ber = probe_ber(cfg, tx, rx, mid);
    if (ber >= cal.ber_low && ber <= cal.ber_high) return mid;
    if (ber < cal.ber_low) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw TrainingError("noise calibration did not land in [" + std::to_string(cal.ber_low) + ", " +
                      std::to_string(cal.ber_high) + "] within " +
                      std::to_string(cal.max_steps) + " steps; " + diag.str());
}

RunSummary run_experiment(const config::ExperimentConfig& raw_cfg, const std::string& out_dir) {
  config::ExperimentConfig cfg = raw_cfg;
  cfg.finalize();
  cfg.validate();
  ensure_dir(out_dir);
  const int s = cfg.loop.transceiver.symbol_count;

  Rng pretrain_rng(derive_seed(cfg.loop.seed, kStreamPretrain));
  auto pre = pretrain::pretrain_transceiver(cfg.pretrain, pretrain_rng);

  RunSummary summary;
  summary.calibrated_noise_sigma =
      cfg.calibration.enabled ? calibrate_noise(cfg, pre.tx, pre.rx) : cfg.channel.noise_sigma;
  const channel::ImddOracle oracle = make_oracle(cfg, summary.calibrated_noise_sigma, kStreamChannel);

  auto state = e2e::make_initial_state(std::move(pre.tx), std::move(pre.rx), cfg.loop, oracle);
  report::MetricsWriter metrics(join(out_dir, "metrics.jsonl"), join(out_dir, "metrics.csv"));
  metrics.append(state.history.front());
  const nn::Matrix confusion_k0 = e2e::evaluate(state.receiver, state.pending, s).confusion;
  save_state_checkpoint(join(out_dir, "checkpoint_k0.bin"), state);

  {
    checkpoint::TensorFile dump;
    checkpoint::append_dataset(
        dump, gan::build_conditioning_dataset(state.pending.sequences, cfg.loop.gan.memory,
                                              cfg.loop.effective_q()));
    checkpoint::save_tensor_file(join(out_dir, "dataset_k0.bin"), dump);
  }

  // Baseline arm: the prior art sees exactly the k = 0 state and the k = 0
  // held-out measurements, and may only touch the receiver.
  const nn::DenseNet tx_k0 = state.transmitter;
  nn::DenseNet rx_baseline = state.receiver;
  {
    const int q = cfg.loop.effective_q();
    const auto& first = state.pending.sequences.front();
    nn::AdamState adam(rx_baseline.param_count());
    e2e::receiver_only_update(rx_baseline,
                              std::span<const int>(first.messages.data(), static_cast<size_t>(q)),
                              first.rx.topRows(q), cfg.baseline.rx_steps, cfg.baseline.rx_lr,
                              adam, s);
  }

  for (int k = 1; k <= cfg.loop.iterations; ++k) {
    const auto record = e2e::run_iteration(state, cfg.loop, oracle, k);
    metrics.append(record);
    save_state_checkpoint(join(out_dir, "checkpoint_k" + std::to_string(k) + ".bin"), state);
  }
  summary.history = state.history;
  const nn::Matrix confusion_final = e2e::evaluate(state.receiver, state.pending, s).confusion;
  save_state_checkpoint(join(out_dir, "checkpoint.bin"), state);

  // Baseline evaluation on a fresh transmission with the untouched k = 0
  // transmitter, mirroring the final arm's fresh-data evaluation.
  const auto baseline_data =
      e2e::transmit_and_measure(tx_k0, oracle, cfg.loop.sequences, cfg.loop.messages_per_sequence,
                                s, state.rng, state.stream_counter);
  const auto baseline_eval = e2e::evaluate(rx_baseline, baseline_data, s);
  summary.baseline_ber = baseline_eval.ber;
  summary.baseline_q2_db = baseline_eval.q2_db;
  summary.q2_delta_db = summary.history.back().q2_db - summary.baseline_q2_db;

  {
    nlohmann::ordered_json cmp{{"final_ber", summary.history.back().ber},
                               {"final_q2_db", summary.history.back().q2_db},
                               {"baseline_ber", summary.baseline_ber},
                               {"baseline_q2_db", summary.baseline_q2_db},
                               {"q2_delta_db", summary.q2_delta_db},
                               {"baseline_rx_steps", cfg.baseline.rx_steps},
                               {"calibrated_noise_sigma", summary.calibrated_noise_sigma},
                               {"seed", cfg.loop.seed}};
    write_text(join(out_dir, "comparison.json"), cmp.dump(2) + "\n");
  }

  const nn::Matrix waveforms = transceiver::tx_waveforms(state.transmitter, s);
  {
    checkpoint::TensorFile plot_data;
    checkpoint::append_matrix(plot_data, "confusion_k0", confusion_k0);
    checkpoint::append_matrix(plot_data, "confusion_final", confusion_final);
    checkpoint::append_matrix(plot_data, "waveforms", waveforms);
    checkpoint::save_tensor_file(join(out_dir, "report_data.bin"), plot_data);
  }
  write_text(join(out_dir, "ber_vs_iteration.svg"), report::ber_curve_svg(summary.history));
  write_text(join(out_dir, "confusion_k0.svg"), report::confusion_svg(confusion_k0));
  write_text(join(out_dir, "confusion_final.svg"), report::confusion_svg(confusion_final));
  write_text(join(out_dir, "constellation.svg"), report::constellation_svg(waveforms));
  return summary;
}

double pretrain_to_file(const config::ExperimentConfig& raw_cfg, const std::string& out_dir) {
  config::ExperimentConfig cfg = raw_cfg;
  cfg.finalize();
  cfg.validate();
  ensure_dir(out_dir);
  Rng rng(derive_seed(cfg.loop.seed, kStreamPretrain));
  const auto pre = pretrain::pretrain_transceiver(cfg.pretrain, rng);
  const std::pair<std::string, const nn::DenseNet*> nets[] = {{"tx", &pre.tx}, {"rx", &pre.rx}};
  checkpoint::save_nets(join(out_dir, "pretrained.bin"), nets);
  return pre.final_ser;
}

gan::StepLosses train_gan_from_dump(const config::ExperimentConfig& raw_cfg,
                                    const std::string& dataset_path, const std::string& out_dir) {
  config::ExperimentConfig cfg = raw_cfg;
  cfg.finalize();
  cfg.validate();
  ensure_dir(out_dir);
  const auto data = checkpoint::dataset_from(checkpoint::load_tensor_file(dataset_path));
  Rng rng(derive_seed(cfg.loop.seed, kStreamChannel + 1));
  const auto result = gan::train_gan(data, cfg.loop.gan, rng);
  const std::pair<std::string, const nn::DenseNet*> nets[] = {
      {"gen", &result.pair.generator}, {"disc", &result.pair.discriminator}};
  checkpoint::save_nets(join(out_dir, "gan.bin"), nets);
  return result.history.back();
}

EvalSummary baseline_rx(const config::ExperimentConfig& raw_cfg, const std::string& checkpoint_path,
                        const std::string& out_dir) {
  config::ExperimentConfig cfg = raw_cfg;
  cfg.finalize();
  cfg.validate();
  ensure_dir(out_dir);
  auto nets = checkpoint::load_nets(checkpoint_path);
  if (!nets.contains("tx") || !nets.contains("rx"))
    throw UsageError("checkpoint '" + checkpoint_path + "' does not hold a tx/rx pair");
  const nn::DenseNet tx = std::move(nets.at("tx"));
  nn::DenseNet rx = std::move(nets.at("rx"));
  const int s = cfg.loop.transceiver.symbol_count;

  const channel::ImddOracle oracle = make_oracle(cfg, cfg.channel.noise_sigma, kStreamChannel);
  Rng rng(derive_seed(cfg.loop.seed, kStreamBaselineJson));
  uint64_t streams = 0;
  const auto train_data = e2e::transmit_and_measure(
      tx, oracle, cfg.loop.sequences, cfg.loop.messages_per_sequence, s, rng, streams);
  const int q = cfg.loop.effective_q();
  const auto& first = train_data.sequences.front();
  nn::AdamState adam(rx.param_count());
  e2e::receiver_only_update(rx, std::span<const int>(first.messages.data(), static_cast<size_t>(q)),
                            first.rx.topRows(q), cfg.baseline.rx_steps, cfg.baseline.rx_lr, adam,
                            s);

  const auto eval_data = e2e::transmit_and_measure(
      tx, oracle, cfg.loop.sequences, cfg.loop.messages_per_sequence, s, rng, streams);
  const auto eval = e2e::evaluate(rx, eval_data, s);
  EvalSummary summary{eval.ser, eval.ber, eval.q2_db};

  const std::pair<std::string, const nn::DenseNet*> nets_out[] = {{"tx", &tx}, {"rx", &rx}};
  checkpoint::save_nets(join(out_dir, "baseline_rx.bin"), nets_out);
  nlohmann::ordered_json j{{"baseline_ser", summary.ser},
                           {"baseline_ber", summary.ber},
                           {"baseline_q2_db", summary.q2_db},
                           {"baseline_rx_steps", cfg.baseline.rx_steps},
                           {"seed", cfg.loop.seed}};
  write_text(join(out_dir, "baseline.json"), j.dump(2) + "\n");
  return summary;
}

EvalSummary evaluate_checkpoint(const config::ExperimentConfig& raw_cfg,
                                const std::string& checkpoint_path) {
  config::ExperimentConfig cfg = raw_cfg;
  cfg.finalize();
  cfg.validate();
  auto nets = checkpoint::load_nets(checkpoint_path);
  if (!nets.contains("tx") || !nets.contains("rx"))
    throw UsageError("checkpoint '" + checkpoint_path + "' does not hold a tx/rx pair");
  const int s = cfg.loop.transceiver.symbol_count;
  const channel::ImddOracle oracle = make_oracle(cfg, cfg.channel.noise_sigma, kStreamChannel);
  Rng rng(derive_seed(cfg.loop.seed, kStreamEvaluate));
  uint64_t streams = 0;
  const auto data = e2e::transmit_and_measure(nets.at("tx"), oracle, cfg.loop.sequences,
                                              cfg.loop.messages_per_sequence, s, rng, streams);
  const auto eval = e2e::evaluate(nets.at("rx"), data, s);
  return EvalSummary{eval.ser, eval.ber, eval.q2_db};
}

void regenerate_report(const std::string& out_dir) {
  const auto history = report::read_metrics_jsonl(join(out_dir, "metrics.jsonl"));
  if (history.empty()) throw UsageError("no parseable metrics in '" + out_dir + "'");
  const auto plot_data = checkpoint::load_tensor_file(join(out_dir, "report_data.bin"));
  report::render_report(history, checkpoint::matrix_from(plot_data, "confusion_k0"),
                        checkpoint::matrix_from(plot_data, "confusion_final"),
                        checkpoint::matrix_from(plot_data, "waveforms"), out_dir);
}

}  // namespace ganlink::driver
