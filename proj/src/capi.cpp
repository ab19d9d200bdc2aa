#include "ganlink.h"

#include <cstring>
#include <string>

#include "config.hpp"
#include "driver.hpp"
#include "errors.hpp"

using ganlink::config::ExperimentConfig;

struct gl_config {
  ExperimentConfig cfg;
};

namespace {

thread_local std::string g_last_error = "no error";

template <typename Fn>
gl_status guarded(Fn&& fn) {
  try {
    fn();
    return GL_OK;
  } catch (const ganlink::ConfigError& e) {
    g_last_error = e.what();
    return GL_CONFIG_ERROR;
  } catch (const ganlink::UsageError& e) {
    g_last_error = e.what();
    return GL_USAGE_ERROR;
  } catch (const ganlink::ShapeError& e) {
    g_last_error = e.what();
    return GL_SHAPE_ERROR;
  } catch (const ganlink::NumericError& e) {
    g_last_error = e.what();
    return GL_NUMERIC_ERROR;
  } catch (const ganlink::IoError& e) {
    g_last_error = e.what();
    return GL_IO_ERROR;
  } catch (const ganlink::TrainingError& e) {
    g_last_error = e.what();
    return GL_TRAINING_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GL_UNKNOWN_ERROR;
  } catch (...) {
    g_last_error = "unknown failure";
    return GL_UNKNOWN_ERROR;
  }
}

gl_status require(bool ok, const char* message) {
  if (ok) return GL_OK;
  g_last_error = message;
  return GL_USAGE_ERROR;
}

}  // namespace

extern "C" {

const char* gl_version(void) { return "1.0.0"; }

const char* gl_last_error(void) { return g_last_error.c_str(); }

const char* gl_schema(void) {
  static const std::string schema = ganlink::config::schema_text();
  return schema.c_str();
}

gl_status gl_config_default(gl_config** out) {
  if (require(out != nullptr, "gl_config_default: out is NULL") != GL_OK) return GL_USAGE_ERROR;
  return guarded([&] { *out = new gl_config{ganlink::config::default_config()}; });
}

gl_status gl_config_load(const char* path, gl_config** out) {
  if (require(path != nullptr && out != nullptr, "gl_config_load: NULL argument") != GL_OK)
    return GL_USAGE_ERROR;
  return guarded([&] { *out = new gl_config{ganlink::config::parse_config(path)}; });
}

gl_status gl_config_set(gl_config* cfg, const char* key, const char* value) {
  if (require(cfg != nullptr && key != nullptr && value != nullptr,
              "gl_config_set: NULL argument") != GL_OK)
    return GL_USAGE_ERROR;
  return guarded([&] { ganlink::config::set_value(cfg->cfg, key, value); });
}

gl_status gl_config_get(const gl_config* cfg, const char* key, char* buffer, size_t buffer_size) {
  if (require(cfg != nullptr && key != nullptr && buffer != nullptr && buffer_size > 0,
              "gl_config_get: NULL argument or empty buffer") != GL_OK)
    return GL_USAGE_ERROR;
  return guarded([&] {
    const std::string value = ganlink::config::get_value(cfg->cfg, key);
    if (value.size() + 1 > buffer_size)
      throw ganlink::UsageError("gl_config_get: buffer too small for '" + value + "'");
    std::memcpy(buffer, value.c_str(), value.size() + 1);
  });
}

gl_status gl_config_validate(const gl_config* cfg) {
  if (require(cfg != nullptr, "gl_config_validate: cfg is NULL") != GL_OK) return GL_USAGE_ERROR;
  return guarded([&] { cfg->cfg.validate(); });
}

void gl_config_free(gl_config* cfg) { delete cfg; }

gl_status gl_run(const gl_config* cfg, const char* out_dir, gl_run_summary* summary) {
  if (require(cfg != nullptr && out_dir != nullptr, "gl_run: NULL argument") != GL_OK)
    return GL_USAGE_ERROR;
  return guarded([&] {
    const auto result = ganlink::driver::run_experiment(cfg->cfg, out_dir);
    if (summary != nullptr) {
      summary->initial_ber = result.history.front().ber;
      summary->final_ber = result.history.back().ber;
      summary->final_q2_db = result.history.back().q2_db;
      summary->baseline_ber = result.baseline_ber;
      summary->baseline_q2_db = result.baseline_q2_db;
      summary->q2_delta_db = result.q2_delta_db;
      summary->calibrated_noise_sigma = result.calibrated_noise_sigma;
      summary->iterations = static_cast<int32_t>(result.history.size()) - 1;
    }
  });
}

gl_status gl_pretrain(const gl_config* cfg, const char* out_dir, double* final_ser) {
  if (require(cfg != nullptr && out_dir != nullptr, "gl_pretrain: NULL argument") != GL_OK)
    return GL_USAGE_ERROR;
  return guarded([&] {
    const double ser = ganlink::driver::pretrain_to_file(cfg->cfg, out_dir);
    if (final_ser != nullptr) *final_ser = ser;
  });
}

gl_status gl_train_gan(const gl_config* cfg, const char* dataset_path, const char* out_dir,
                       double* d_loss, double* g_loss) {
  if (require(cfg != nullptr && dataset_path != nullptr && out_dir != nullptr,
              "gl_train_gan: NULL argument") != GL_OK)
    return GL_USAGE_ERROR;
  return guarded([&] {
    const auto losses = ganlink::driver::train_gan_from_dump(cfg->cfg, dataset_path, out_dir);
    if (d_loss != nullptr) *d_loss = losses.d_loss;
    if (g_loss != nullptr) *g_loss = losses.g_loss;
  });
}

gl_status gl_baseline_rx(const gl_config* cfg, const char* checkpoint_path, const char* out_dir,
                         gl_eval_result* result) {
  if (require(cfg != nullptr && checkpoint_path != nullptr && out_dir != nullptr,
              "gl_baseline_rx: NULL argument") != GL_OK)
    return GL_USAGE_ERROR;
  return guarded([&] {
    const auto eval = ganlink::driver::baseline_rx(cfg->cfg, checkpoint_path, out_dir);
    if (result != nullptr) {
      result->ser = eval.ser;
      result->ber = eval.ber;
      result->q2_db = eval.q2_db;
    }
  });
}

gl_status gl_evaluate(const gl_config* cfg, const char* checkpoint_path, gl_eval_result* result) {
  if (require(cfg != nullptr && checkpoint_path != nullptr, "gl_evaluate: NULL argument") != GL_OK)
    return GL_USAGE_ERROR;
  return guarded([&] {
    const auto eval = ganlink::driver::evaluate_checkpoint(cfg->cfg, checkpoint_path);
    if (result != nullptr) {
      result->ser = eval.ser;
      result->ber = eval.ber;
      result->q2_db = eval.q2_db;
    }
  });
}

gl_status gl_report(const char* out_dir) {
  if (require(out_dir != nullptr, "gl_report: out_dir is NULL") != GL_OK) return GL_USAGE_ERROR;
  return guarded([&] { ganlink::driver::regenerate_report(out_dir); });
}

}  // extern "C"
