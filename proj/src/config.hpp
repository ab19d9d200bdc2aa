// Experiment configuration: one struct covering the whole run, an INI-style
// parser over a key registry (so unknown keys are impossible to sneak in),
// and a generated schema documenting every default.
#pragma once

#include <string>
#include <string_view>

#include "channel.hpp"
#include "e2e.hpp"
#include "pretrain.hpp"

namespace ganlink::config {

struct BaselineConfig {
  int rx_steps = 200;  // receiver-only update budget, reported with results
  double rx_lr = 1e-3;

  void validate() const;
};

// Bisection on channel.noise_sigma until the pretrained pair's starting BER
// lands inside [ber_low, ber_high].
struct CalibrationConfig {
  bool enabled = true;
  double ber_low = 1e-2;
  double ber_high = 5e-2;
  double sigma_low = 1e-4;
  double sigma_high = 1.0;
  int max_steps = 40;
  int probe_sequences = 4;  // transmission size used to estimate BER per probe

  void validate() const;
};

struct ExperimentConfig {
  channel::ChannelConfig channel;
  e2e::LoopConfig loop;
  pretrain::PretrainConfig pretrain;
  BaselineConfig baseline;
  CalibrationConfig calibration;

  // Copies the shared fields (samples_per_symbol, sub-configs reused by
  // pretraining) to the places that need them. Called by the parser; call it
  // after editing fields by hand.
  void finalize();
  void validate() const;  // throws ConfigError
};

ExperimentConfig default_config();

// [section] / key = value text. '#' and ';' start comments. Unknown keys,
// type errors and per-key constraint violations carry the offending line
// number; cross-key violations name the keys involved.
ExperimentConfig parse_config_text(std::string_view text, const std::string& origin);
ExperimentConfig parse_config(const std::string& path);

// Dotted access ("gan.memory") for programmatic overrides; throws ConfigError
// on unknown keys or bad values. set_value() re-finalizes but does not run
// full validation: batch several sets, then validate().
void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_value(const ExperimentConfig& cfg, const std::string& key);

// Parseable INI document of every key with its default and a comment.
std::string schema_text();

}  // namespace ganlink::config
