// Orchestration of the full experiment and of the standalone entry points the
// CLI exposes: pretraining, noise calibration, the optimization loop with its
// receiver-only baseline arm, artifact emission.
#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "e2e.hpp"
#include "gan.hpp"

namespace ganlink::driver {

struct EvalSummary {
  double ser = 0.0;
  double ber = 0.0;
  double q2_db = 0.0;
};

struct RunSummary {
  std::vector<e2e::MetricsRecord> history;  // k = 0 .. K
  double calibrated_noise_sigma = 0.0;
  double baseline_ber = 0.0;
  double baseline_q2_db = 0.0;
  double q2_delta_db = 0.0;  // final end-to-end Q^2 minus receiver-only Q^2
};

// Log-domain bisection on channel.noise_sigma until the pair's measured BER
// lands inside [calibration.ber_low, ber_high]. Probes reuse identical
// message and noise streams so the BER is monotone in sigma. Throws
// TrainingError when the band is unreachable inside the bracket.
double calibrate_noise(const config::ExperimentConfig& cfg, const nn::DenseNet& tx,
                       const nn::DenseNet& rx);

// Pretrain -> calibrate -> k = 0 evaluation -> K iterations, with the
// receiver-only baseline trained on the same k = 0 measurements. Writes into
// out_dir: metrics.jsonl/.csv (streamed), per-iteration checkpoints,
// checkpoint.bin, dataset_k0.bin, report_data.bin, comparison.json and the
// four SVG plots.
RunSummary run_experiment(const config::ExperimentConfig& cfg, const std::string& out_dir);

// Writes out_dir/pretrained.bin (tx + rx); returns the offline SER.
double pretrain_to_file(const config::ExperimentConfig& cfg, const std::string& out_dir);

// Trains a GAN on a dumped conditioning dataset; writes out_dir/gan.bin and
// returns the last step's losses.
gan::StepLosses train_gan_from_dump(const config::ExperimentConfig& cfg,
                                    const std::string& dataset_path, const std::string& out_dir);

// Receiver-only arm from a (tx, rx) checkpoint: fresh transmission, update on
// its held-out pairs, evaluation on a second transmission. Writes
// out_dir/baseline.json and out_dir/baseline_rx.bin.
EvalSummary baseline_rx(const config::ExperimentConfig& cfg, const std::string& checkpoint_path,
                        const std::string& out_dir);

// BER of a checkpointed (tx, rx) pair over the configured link.
EvalSummary evaluate_checkpoint(const config::ExperimentConfig& cfg,
                                const std::string& checkpoint_path);

// Re-renders every report file in out_dir from metrics.jsonl and
// report_data.bin.
void regenerate_report(const std::string& out_dir);

}  // namespace ganlink::driver
