// ganlink command line front end. Everything flows through the C API in
// ganlink.h; this translation unit never touches the core library directly.
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "ganlink.h"

namespace {

constexpr const char* kDefaultConfigFile = "ganlink.cfg";

int exit_code_for(gl_status status) {
  if (status == GL_OK) return 0;
  if (status == GL_CONFIG_ERROR) return 1;
  return 2;
}

int fail(gl_status status) {
  std::fprintf(stderr, "error: %s\n", gl_last_error());
  return exit_code_for(status);
}

struct ConfigHandle {
  gl_config* cfg = nullptr;
  ~ConfigHandle() { gl_config_free(cfg); }
};

// --config wins; otherwise fall back to ./ganlink.cfg. No file at all is a
// config error: runs should be reproducible from an explicit file.
int load_config(const std::string& config_path, bool seed_given, uint64_t seed,
                ConfigHandle& out) {
  std::string path = config_path;
  if (path.empty()) {
    if (!std::filesystem::exists(kDefaultConfigFile)) {
      std::fprintf(stderr, "error: no --config given and ./%s does not exist\n",
                   kDefaultConfigFile);
      return 1;
    }
    path = kDefaultConfigFile;
  }
  gl_status st = gl_config_load(path.c_str(), &out.cfg);
  if (st != GL_OK) return fail(st);
  if (seed_given) {
    st = gl_config_set(out.cfg, "loop.seed", std::to_string(seed).c_str());
    if (st != GL_OK) return fail(st);
  }
  return 0;
}

int cmd_run(const ConfigHandle& cfg, const std::string& out_dir) {
  gl_run_summary summary{};
  const gl_status st = gl_run(cfg.cfg, out_dir.c_str(), &summary);
  if (st != GL_OK) return fail(st);
  std::printf("iterations        %" PRId32 "\n", summary.iterations);
  std::printf("noise sigma       %.6g\n", summary.calibrated_noise_sigma);
  std::printf("BER k=0 -> k=%-4" PRId32 " %.6g -> %.6g\n", summary.iterations,
              summary.initial_ber, summary.final_ber);
  std::printf("Q^2 final         %.4f dB\n", summary.final_q2_db);
  std::printf("Q^2 receiver-only %.4f dB\n", summary.baseline_q2_db);
  std::printf("Q^2 gain          %.4f dB\n", summary.q2_delta_db);
  return 0;
}

int cmd_pretrain(const ConfigHandle& cfg, const std::string& out_dir) {
  double ser = 0.0;
  const gl_status st = gl_pretrain(cfg.cfg, out_dir.c_str(), &ser);
  if (st != GL_OK) return fail(st);
  std::printf("pretrain SER %.6g\n", ser);
  return 0;
}

int cmd_train_gan(const ConfigHandle& cfg, const std::string& dataset,
                  const std::string& out_dir) {
  double d_loss = 0.0;
  double g_loss = 0.0;
  const gl_status st = gl_train_gan(cfg.cfg, dataset.c_str(), out_dir.c_str(), &d_loss, &g_loss);
  if (st != GL_OK) return fail(st);
  std::printf("discriminator loss %.6g\n", d_loss);
  std::printf("generator loss     %.6g\n", g_loss);
  return 0;
}

int print_eval(const gl_eval_result& r) {
  std::printf("SER %.6g\n", r.ser);
  std::printf("BER %.6g\n", r.ber);
  std::printf("Q^2 %.4f dB\n", r.q2_db);
  return 0;
}

int cmd_baseline_rx(const ConfigHandle& cfg, const std::string& checkpoint,
                    const std::string& out_dir) {
  gl_eval_result result{};
  const gl_status st = gl_baseline_rx(cfg.cfg, checkpoint.c_str(), out_dir.c_str(), &result);
  if (st != GL_OK) return fail(st);
  return print_eval(result);
}

int cmd_evaluate(const ConfigHandle& cfg, const std::string& checkpoint) {
  gl_eval_result result{};
  const gl_status st = gl_evaluate(cfg.cfg, checkpoint.c_str(), &result);
  if (st != GL_OK) return fail(st);
  return print_eval(result);
}

int cmd_report(const std::string& out_dir) {
  const gl_status st = gl_report(out_dir.c_str());
  if (st != GL_OK) return fail(st);
  std::printf("report regenerated in %s\n", out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ganlink: GAN-assisted end-to-end optimizer for a simulated IM/DD link"};
  app.set_version_flag("--version", gl_version());

  std::string config_path;
  uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = "out";
  bool want_schema = false;

  app.add_option("--config", config_path, "INI config file (default: ./ganlink.cfg)");
  app.add_option("--seed", seed, "override loop.seed")->each([&](const std::string&) {
    seed_given = true;
  });
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_flag("--schema", want_schema, "print the annotated config schema and exit");

  auto* run = app.add_subcommand("run", "run the full surrogate-optimization experiment");
  run->fallthrough();
  auto* pretrain = app.add_subcommand("pretrain", "pretrain the transceiver on the smooth model");
  pretrain->fallthrough();
  auto* train_gan = app.add_subcommand("train-gan", "train a generator on a dumped dataset");
  train_gan->fallthrough();
  std::string dataset_path;
  train_gan->add_option("dataset", dataset_path, "dataset dump (dataset_k0.bin)")->required();
  auto* baseline = app.add_subcommand("baseline-rx", "receiver-only fine-tune from a checkpoint");
  baseline->fallthrough();
  std::string checkpoint_path;
  baseline->add_option("checkpoint", checkpoint_path, "transceiver checkpoint")->required();
  auto* evaluate = app.add_subcommand("evaluate", "measure SER/BER/Q^2 of a checkpoint");
  evaluate->fallthrough();
  evaluate->add_option("checkpoint", checkpoint_path, "transceiver checkpoint")->required();
  auto* report = app.add_subcommand("report", "rebuild metrics files and SVG plots in --out");
  report->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n%s", e.what(), app.help().c_str());
    return 1;
  }

  if (want_schema) {
    std::fputs(gl_schema(), stdout);
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::fputs(app.help().c_str(), stderr);
    return 1;
  }

  if (report->parsed()) return cmd_report(out_dir);

  ConfigHandle cfg;
  const int rc = load_config(config_path, seed_given, seed, cfg);
  if (rc != 0) return rc;

  if (run->parsed()) return cmd_run(cfg, out_dir);
  if (pretrain->parsed()) return cmd_pretrain(cfg, out_dir);
  if (train_gan->parsed()) return cmd_train_gan(cfg, dataset_path, out_dir);
  if (baseline->parsed()) return cmd_baseline_rx(cfg, checkpoint_path, out_dir);
  if (evaluate->parsed()) return cmd_evaluate(cfg, checkpoint_path);

  std::fputs(app.help().c_str(), stderr);
  return 1;
}
