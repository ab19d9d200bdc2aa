#include "config.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace ganlink::config {

void BaselineConfig::validate() const {
  if (rx_steps < 1) throw ConfigError("baseline.rx_steps must be >= 1");
  if (rx_lr <= 0.0) throw ConfigError("baseline.rx_lr must be positive");
}

void CalibrationConfig::validate() const {
  if (!(ber_low > 0.0 && ber_low < ber_high && ber_high < 0.5))
    throw ConfigError("calibration needs 0 < ber_low < ber_high < 0.5");
  if (!(sigma_low > 0.0 && sigma_low < sigma_high))
    throw ConfigError("calibration needs 0 < sigma_low < sigma_high");
  if (max_steps < 1) throw ConfigError("calibration.max_steps must be >= 1");
  if (probe_sequences < 1) throw ConfigError("calibration.probe_sequences must be >= 1");
}

void ExperimentConfig::finalize() {
  loop.transceiver.samples_per_symbol = channel.samples_per_symbol;
  loop.gan.samples_per_symbol = channel.samples_per_symbol;
  pretrain.transceiver = loop.transceiver;
  pretrain.channel = channel;
}

void ExperimentConfig::validate() const {
  channel.validate();
  loop.validate();
  pretrain.validate();
  baseline.validate();
  calibration.validate();
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  // Desk profile: a full run finishes in minutes on one core. Paper-scale
  // values (B = 1000, 10^4 GAN steps, N = 500, w = 8*10^4) stay reachable
  // through the same keys.
  cfg.loop.gan.batch_size = 256;
  cfg.loop.gan.total_steps = 2000;
  cfg.finalize();
  return cfg;
}

namespace {

[[noreturn]] void bad_value(const std::string& what, const std::string& raw) {
  throw ConfigError("expected " + what + ", got '" + raw + "'");
}

double parse_double(const std::string& raw) {
  double v{};
  const char* end = raw.data() + raw.size();
  auto [p, ec] = std::from_chars(raw.data(), end, v);
  if (ec != std::errc{} || p != end) bad_value("a number", raw);
  return v;
}

int64_t parse_int(const std::string& raw) {
  int64_t v{};
  const char* end = raw.data() + raw.size();
  auto [p, ec] = std::from_chars(raw.data(), end, v);
  if (ec != std::errc{} || p != end) bad_value("an integer", raw);
  return v;
}

uint64_t parse_u64(const std::string& raw) {
  uint64_t v{};
  const char* end = raw.data() + raw.size();
  auto [p, ec] = std::from_chars(raw.data(), end, v);
  if (ec != std::errc{} || p != end) bad_value("an unsigned integer", raw);
  return v;
}

bool parse_bool(const std::string& raw) {
  if (raw == "true" || raw == "1" || raw == "on" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "off" || raw == "no") return false;
  bad_value("a boolean (true/false)", raw);
}

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(int64_t v) { return std::to_string(v); }
std::string fmt(uint64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

int checked_int(const std::string& raw, int64_t lo, int64_t hi, const char* what) {
  const int64_t v = parse_int(raw);
  if (v < lo || v > hi)
    throw ConfigError(std::string(what) + " must lie in [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  return static_cast<int>(v);
}

double positive(const std::string& raw, const char* what) {
  const double v = parse_double(raw);
  if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be positive");
  return v;
}

double non_negative(const std::string& raw, const char* what) {
  const double v = parse_double(raw);
  if (v < 0.0) throw ConfigError(std::string(what) + " must be non-negative");
  return v;
}

struct KeyEntry {
  const char* name;
  const char* doc;
  std::string (*get)(const ExperimentConfig&);
  void (*set)(ExperimentConfig&, const std::string&);
};

constexpr int64_t kMaxCount = 1'000'000'000;

const std::vector<KeyEntry>& registry() {
  static const std::vector<KeyEntry> entries = {
      {"channel.samples_per_symbol", "samples per symbol (n), shared by every module",
       [](const ExperimentConfig& c) { return fmt(c.channel.samples_per_symbol); },
       [](ExperimentConfig& c, const std::string& v) {
         c.channel.samples_per_symbol = checked_int(v, 1, 64, "channel.samples_per_symbol");
       }},
      {"channel.dac_rate", "converter sample rate in Hz",
       [](const ExperimentConfig& c) { return fmt(c.channel.dac_rate); },
       [](ExperimentConfig& c, const std::string& v) {
         c.channel.dac_rate = positive(v, "channel.dac_rate");
       }},
      {"channel.lpf_bandwidth", "single-sided low-pass bandwidth in Hz (must stay below Nyquist)",
       [](const ExperimentConfig& c) { return fmt(c.channel.lpf_bandwidth); },
       [](ExperimentConfig& c, const std::string& v) {
         c.channel.lpf_bandwidth = positive(v, "channel.lpf_bandwidth");
       }},
      {"channel.fiber_length", "fibre length in meters",
       [](const ExperimentConfig& c) { return fmt(c.channel.fiber_length); },
       [](ExperimentConfig& c, const std::string& v) {
         c.channel.fiber_length = non_negative(v, "channel.fiber_length");
       }},
      {"channel.dispersion_ps_nm_km", "dispersion parameter D in ps/(nm km)",
       [](const ExperimentConfig& c) { return fmt(c.channel.dispersion * 1e6); },
       [](ExperimentConfig& c, const std::string& v) {
         c.channel.dispersion = parse_double(v) / 1e6;  // division round-trips decimals exactly
       }},
      {"channel.wavelength_nm", "carrier wavelength in nm",
       [](const ExperimentConfig& c) { return fmt(c.channel.wavelength * 1e9); },
       [](ExperimentConfig& c, const std::string& v) {
         c.channel.wavelength = positive(v, "channel.wavelength_nm") / 1e9;
       }},
      {"channel.dac_bits", "DAC resolution in bits",
       [](const ExperimentConfig& c) { return fmt(c.channel.dac_bits); },
       [](ExperimentConfig& c, const std::string& v) {
         c.channel.dac_bits = checked_int(v, 1, 24, "channel.dac_bits");
       }},
      {"channel.adc_bits", "ADC resolution in bits",
       [](const ExperimentConfig& c) { return fmt(c.channel.adc_bits); },
       [](ExperimentConfig& c, const std::string& v) {
         c.channel.adc_bits = checked_int(v, 1, 24, "channel.adc_bits");
       }},
      {"channel.adc_clip_sigmas", "ADC clip range as a multiple of the signal std",
       [](const ExperimentConfig& c) { return fmt(c.channel.adc_clip_sigmas); },
       [](ExperimentConfig& c, const std::string& v) {
         c.channel.adc_clip_sigmas = positive(v, "channel.adc_clip_sigmas");
       }},
      {"channel.noise_sigma", "receiver noise std (overridden when calibration is enabled)",
       [](const ExperimentConfig& c) { return fmt(c.channel.noise_sigma); },
       [](ExperimentConfig& c, const std::string& v) {
         c.channel.noise_sigma = non_negative(v, "channel.noise_sigma");
       }},

      {"transceiver.symbol_count", "alphabet size S (power of two)",
       [](const ExperimentConfig& c) { return fmt(c.loop.transceiver.symbol_count); },
       [](ExperimentConfig& c, const std::string& v) {
         const int s = checked_int(v, 2, 1024, "transceiver.symbol_count");
         if (!std::has_single_bit(static_cast<unsigned>(s)))
           throw ConfigError("transceiver.symbol_count must be a power of two");
         c.loop.transceiver.symbol_count = s;
       }},

      {"gan.memory", "conditioning window length in symbols (odd)",
       [](const ExperimentConfig& c) { return fmt(c.loop.gan.memory); },
       [](ExperimentConfig& c, const std::string& v) {
         const int m = checked_int(v, 1, 63, "gan.memory");
         if (m % 2 == 0) throw ConfigError("gan.memory must be odd");
         c.loop.gan.memory = m;
       }},
      {"gan.batch_size", "rows per adversarial batch (B)",
       [](const ExperimentConfig& c) { return fmt(c.loop.gan.batch_size); },
       [](ExperimentConfig& c, const std::string& v) {
         c.loop.gan.batch_size = checked_int(v, 1, kMaxCount, "gan.batch_size");
       }},
      {"gan.total_steps", "adversarial steps per outer iteration",
       [](const ExperimentConfig& c) { return fmt(c.loop.gan.total_steps); },
       [](ExperimentConfig& c, const std::string& v) {
         c.loop.gan.total_steps = checked_int(v, 1, kMaxCount, "gan.total_steps");
       }},
      {"gan.d_updates_per_step", "discriminator updates per step",
       [](const ExperimentConfig& c) { return fmt(c.loop.gan.d_updates_per_step); },
       [](ExperimentConfig& c, const std::string& v) {
         c.loop.gan.d_updates_per_step = checked_int(v, 1, 1000, "gan.d_updates_per_step");
       }},
      {"gan.d_learning_rate", "discriminator Adam learning rate",
       [](const ExperimentConfig& c) { return fmt(c.loop.gan.d_learning_rate); },
       [](ExperimentConfig& c, const std::string& v) {
         c.loop.gan.d_learning_rate = positive(v, "gan.d_learning_rate");
       }},
      {"gan.g_lr_start", "generator learning rate at step 0",
       [](const ExperimentConfig& c) { return fmt(c.loop.gan.g_lr_start); },
       [](ExperimentConfig& c, const std::string& v) {
         c.loop.gan.g_lr_start = positive(v, "gan.g_lr_start");
       }},
      {"gan.g_lr_end", "generator learning rate in the final interval",
       [](const ExperimentConfig& c) { return fmt(c.loop.gan.g_lr_end); },
       [](ExperimentConfig& c, const std::string& v) {
         c.loop.gan.g_lr_end = positive(v, "gan.g_lr_end");
       }},
      {"gan.g_lr_interval", "steps per learning-rate plateau",
       [](const ExperimentConfig& c) { return fmt(c.loop.gan.g_lr_interval); },
       [](ExperimentConfig& c, const std::string& v) {
         c.loop.gan.g_lr_interval =
             checked_int(v, 1, kMaxCount, "gan.g_lr_interval");
       }},
      {"gan.warm_start", "reuse the previous iteration's GAN instead of retraining",
       [](const ExperimentConfig& c) { return fmt(c.loop.gan.warm_start); },
       [](ExperimentConfig& c, const std::string& v) { c.loop.gan.warm_start = parse_bool(v); }},

      {"loop.iterations", "outer optimization iterations (K)",
       [](const ExperimentConfig& c) { return fmt(c.loop.iterations); },
       [](ExperimentConfig& c, const std::string& v) {
         c.loop.iterations = checked_int(v, 1, 100000, "loop.iterations");
       }},
      {"loop.sequences", "transmitted sequences per iteration (N)",
       [](const ExperimentConfig& c) { return fmt(c.loop.sequences); },
       [](ExperimentConfig& c, const std::string& v) {
         c.loop.sequences = checked_int(v, 1, kMaxCount, "loop.sequences");
       }},
      {"loop.messages_per_sequence", "messages per sequence (w)",
       [](const ExperimentConfig& c) { return fmt(c.loop.messages_per_sequence); },
       [](ExperimentConfig& c, const std::string& v) {
         c.loop.messages_per_sequence = checked_int(v, 4, kMaxCount, "loop.messages_per_sequence");
       }},
      {"loop.q", "held-out pairs per iteration (capped at 10% of N*w)",
       [](const ExperimentConfig& c) { return fmt(c.loop.q); },
       [](ExperimentConfig& c, const std::string& v) {
         c.loop.q = checked_int(v, 2, kMaxCount, "loop.q");
       }},
      {"loop.inner_transceiver_steps", "transceiver Adam updates through the surrogate per iteration",
       [](const ExperimentConfig& c) { return fmt(c.loop.inner_transceiver_steps); },
       [](ExperimentConfig& c, const std::string& v) {
         c.loop.inner_transceiver_steps =
             checked_int(v, 1, kMaxCount, "loop.inner_transceiver_steps");
       }},
      {"loop.transceiver_lr", "learning rate of those updates",
       [](const ExperimentConfig& c) { return fmt(c.loop.transceiver_lr); },
       [](ExperimentConfig& c, const std::string& v) {
         c.loop.transceiver_lr = positive(v, "loop.transceiver_lr");
       }},
      {"loop.seed", "master seed; every stream derives from it",
       [](const ExperimentConfig& c) { return fmt(c.loop.seed); },
       [](ExperimentConfig& c, const std::string& v) { c.loop.seed = parse_u64(v); }},

      {"pretrain.noise_scale", "mismatch knob: fraction of channel.noise_sigma used offline",
       [](const ExperimentConfig& c) { return fmt(c.pretrain.noise_scale); },
       [](ExperimentConfig& c, const std::string& v) {
         c.pretrain.noise_scale = non_negative(v, "pretrain.noise_scale");
       }},
      {"pretrain.steps", "offline training steps",
       [](const ExperimentConfig& c) { return fmt(c.pretrain.steps); },
       [](ExperimentConfig& c, const std::string& v) {
         c.pretrain.steps = checked_int(v, 1, kMaxCount, "pretrain.steps");
       }},
      {"pretrain.batch_symbols", "symbols per offline training sequence",
       [](const ExperimentConfig& c) { return fmt(c.pretrain.batch_symbols); },
       [](ExperimentConfig& c, const std::string& v) {
         c.pretrain.batch_symbols = checked_int(v, 2, kMaxCount, "pretrain.batch_symbols");
       }},
      {"pretrain.learning_rate", "offline Adam learning rate",
       [](const ExperimentConfig& c) { return fmt(c.pretrain.learning_rate); },
       [](ExperimentConfig& c, const std::string& v) {
         c.pretrain.learning_rate = positive(v, "pretrain.learning_rate");
       }},
      {"pretrain.target_ser", "offline SER the pretraining must reach",
       [](const ExperimentConfig& c) { return fmt(c.pretrain.target_ser); },
       [](ExperimentConfig& c, const std::string& v) {
         const double t = positive(v, "pretrain.target_ser");
         if (t > 1.0) throw ConfigError("pretrain.target_ser must lie in (0, 1]");
         c.pretrain.target_ser = t;
       }},
      {"pretrain.eval_symbols", "symbols used to estimate the offline SER",
       [](const ExperimentConfig& c) { return fmt(c.pretrain.eval_symbols); },
       [](ExperimentConfig& c, const std::string& v) {
         c.pretrain.eval_symbols = checked_int(v, 10, kMaxCount, "pretrain.eval_symbols");
       }},

      {"baseline.rx_steps", "receiver-only update budget on the k = 0 measured pairs",
       [](const ExperimentConfig& c) { return fmt(c.baseline.rx_steps); },
       [](ExperimentConfig& c, const std::string& v) {
         c.baseline.rx_steps = checked_int(v, 1, kMaxCount, "baseline.rx_steps");
       }},
      {"baseline.rx_lr", "receiver-only learning rate",
       [](const ExperimentConfig& c) { return fmt(c.baseline.rx_lr); },
       [](ExperimentConfig& c, const std::string& v) {
         c.baseline.rx_lr = positive(v, "baseline.rx_lr");
       }},

      {"calibration.enabled", "bisect channel.noise_sigma to hit the starting-BER band",
       [](const ExperimentConfig& c) { return fmt(c.calibration.enabled); },
       [](ExperimentConfig& c, const std::string& v) { c.calibration.enabled = parse_bool(v); }},
      {"calibration.ber_low", "lower edge of the starting-BER band",
       [](const ExperimentConfig& c) { return fmt(c.calibration.ber_low); },
       [](ExperimentConfig& c, const std::string& v) {
         c.calibration.ber_low = positive(v, "calibration.ber_low");
       }},
      {"calibration.ber_high", "upper edge of the starting-BER band",
       [](const ExperimentConfig& c) { return fmt(c.calibration.ber_high); },
       [](ExperimentConfig& c, const std::string& v) {
         c.calibration.ber_high = positive(v, "calibration.ber_high");
       }},
      {"calibration.sigma_low", "bisection bracket, low end",
       [](const ExperimentConfig& c) { return fmt(c.calibration.sigma_low); },
       [](ExperimentConfig& c, const std::string& v) {
         c.calibration.sigma_low = positive(v, "calibration.sigma_low");
       }},
      {"calibration.sigma_high", "bisection bracket, high end",
       [](const ExperimentConfig& c) { return fmt(c.calibration.sigma_high); },
       [](ExperimentConfig& c, const std::string& v) {
         c.calibration.sigma_high = positive(v, "calibration.sigma_high");
       }},
      {"calibration.max_steps", "bisection step limit",
       [](const ExperimentConfig& c) { return fmt(c.calibration.max_steps); },
       [](ExperimentConfig& c, const std::string& v) {
         c.calibration.max_steps = checked_int(v, 1, 1000, "calibration.max_steps");
       }},
      {"calibration.probe_sequences", "sequences per calibration probe",
       [](const ExperimentConfig& c) { return fmt(c.calibration.probe_sequences); },
       [](ExperimentConfig& c, const std::string& v) {
         c.calibration.probe_sequences = checked_int(v, 1, kMaxCount, "calibration.probe_sequences");
       }},
  };
  return entries;
}

const KeyEntry* find_key(const std::string& name) {
  for (const auto& e : registry()) {
    if (name == e.name) return &e;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const KeyEntry* entry = find_key(key);
  if (entry == nullptr) throw ConfigError("unknown key '" + key + "'");
  entry->set(cfg, value);
  cfg.finalize();
}

std::string get_value(const ExperimentConfig& cfg, const std::string& key) {
  const KeyEntry* entry = find_key(key);
  if (entry == nullptr) throw ConfigError("unknown key '" + key + "'");
  return entry->get(cfg);
}

ExperimentConfig parse_config_text(std::string_view text, const std::string& origin) {
  ExperimentConfig cfg = default_config();
  std::vector<std::pair<std::string, int>> assigned;  // key -> line

  int line_no = 0;
  size_t pos = 0;
  std::string section;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;

    if (size_t c = line.find_first_of("#;"); c != std::string::npos) line.resize(c);
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + "empty section name");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key before '='");
    if (!section.empty()) key = section + "." + key;

    const KeyEntry* entry = find_key(key);
    if (entry == nullptr) throw ConfigError(where + "unknown key '" + key + "'");
    try {
      entry->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
    assigned.emplace_back(key, line_no);
  }

  cfg.finalize();
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    // Cross-key violation: point at the assignment that likely triggered it.
    const std::string msg = e.what();
    for (const auto& [key, line] : assigned) {
      const std::string leaf = key.substr(key.find('.') + 1);
      if (msg.find(leaf) != std::string::npos) {
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
      }
    }
    throw ConfigError(origin + ": " + msg);
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string schema_text() {
  const ExperimentConfig defaults = default_config();
  std::ostringstream out;
  out << "# every recognized key with its default value\n";
  std::string section;
  for (const auto& e : registry()) {
    const std::string name(e.name);
    const std::string sec = name.substr(0, name.find('.'));
    const std::string leaf = name.substr(name.find('.') + 1);
    if (sec != section) {
      out << "\n[" << sec << "]\n";
      section = sec;
    }
    out << "# " << e.doc << "\n" << leaf << " = " << e.get(defaults) << "\n";
  }
  return out.str();
}

}  // namespace ganlink::config
