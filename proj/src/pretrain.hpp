// Offline transceiver initialization against the smooth (quantizer-free)
// model. The resulting pair is deliberately trained on a mismatched link so
// the measured-data loop starts from working-but-suboptimal networks.
#pragma once

#include <vector>

#include "channel.hpp"
#include "nn.hpp"
#include "rng.hpp"
#include "transceiver.hpp"

namespace ganlink::pretrain {

using nn::DenseNet;

struct PretrainConfig {
  transceiver::TransceiverConfig transceiver;
  channel::ChannelConfig channel;
  double noise_scale = 0.25;  // mismatch knob: fraction of the measured-path noise
  int steps = 800;
  int batch_symbols = 256;  // symbols per training sequence
  double learning_rate = 1e-3;
  double target_ser = 0.2;
  int eval_symbols = 4000;

  void validate() const;  // throws ConfigError
};

struct PretrainResult {
  DenseNet tx;
  DenseNet rx;
  std::vector<double> loss_curve;  // one entry per step
  double final_ser = 1.0;
};

// SER of a pair over `symbols` random messages sent through the smooth model.
double smooth_model_ser(const DenseNet& tx, const DenseNet& rx,
                        const channel::SmoothImdd& model, int symbols, int symbol_count,
                        Rng& rng);

// Joint Adam training of a fresh pair on the smooth model. Throws
// TrainingError with loss diagnostics if the final SER misses target_ser.
PretrainResult pretrain_transceiver(const PretrainConfig& cfg, Rng& rng);

}  // namespace ganlink::pretrain
