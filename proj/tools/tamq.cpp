#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tamq/errors.hpp"
#include "tamq/harness.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<int> threads;
};

int resolve_threads(const Overrides& ov, int from_config) {
  if (ov.threads) return *ov.threads;
  if (const char* env = std::getenv("TAMQ_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw tamq::ConfigError("TAMQ_THREADS is not an integer");
    }
  }
  return from_config;
}

int cmd_run(const std::string& config_path, const Overrides& ov) {
  tamq::ExperimentConfig cfg = tamq::parse_experiment_config_file(config_path);
  if (ov.seed) cfg.sampling.rng_seed = *ov.seed;
  if (ov.output_dir) cfg.output_dir = *ov.output_dir;
  cfg.threads = resolve_threads(ov, cfg.threads);
  cfg.validate();

  const auto start = std::chrono::steady_clock::now();
  const tamq::ResultBundle bundle = tamq::run(cfg);
  tamq::export_tables(bundle, cfg.output_dir);
  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();

  std::cout << "run complete: L=" << cfg.model.sites
            << " retained=" << bundle.spectrum.energies.size()
            << " deficit=" << bundle.spectrum.deficit << " wall="
            << elapsed << "s -> " << cfg.output_dir << "\n";
  return 0;
}

int cmd_scaling(const std::string& config_path, const Overrides& ov) {
  tamq::ScalingConfig cfg = tamq::parse_scaling_config_file(config_path);
  if (ov.output_dir) cfg.output_dir = *ov.output_dir;
  cfg.validate();

  const auto start = std::chrono::steady_clock::now();
  const tamq::ScalingBundle bundle = tamq::run_scaling(cfg);
  tamq::export_scaling_tables(bundle, cfg.output_dir);
  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();

  auto report = [](const char* name, const tamq::ScalingFit& fit) {
    std::cout << "  " << name << ": exponent=" << fit.exponent
              << " r2=" << fit.r_squared << "\n";
  };
  std::cout << "scaling complete (wall=" << elapsed << "s):\n";
  if (bundle.weight) report("weight p1", *bundle.weight);
  if (bundle.fidelity) report("-ln F", *bundle.fidelity);
  if (bundle.matrix_element) {
    report("intensive matrix element", bundle.matrix_element->intensive);
    report("extensive matrix element", bundle.matrix_element->extensive);
  }
  return 0;
}

int cmd_validate(const std::string& config_path) {
  if (tamq::is_scaling_config_file(config_path)) {
    tamq::parse_scaling_config_file(config_path);
  } else {
    tamq::parse_experiment_config_file(config_path);
  }
  std::cout << "config ok: " << config_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TAM quench simulator"};
  app.require_subcommand(1);

  Overrides ov;
  app.add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t v) { ov.seed = v; },
      "Override sampling RNG seed");
  app.add_option_function<std::string>(
      "--output-dir", [&](const std::string& v) { ov.output_dir = v; },
      "Override output directory");
  app.add_option_function<int>(
      "--threads", [&](int v) { ov.threads = v; },
      "Cap internal parallelism");

  std::string run_cfg, scaling_cfg, validate_cfg;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
  run_cmd->add_option("config", run_cfg, "Config file")->required();
  auto* scaling_cmd =
      app.add_subcommand("scaling", "Run finite-size scaling probes");
  scaling_cmd->add_option("config", scaling_cfg, "Config file")->required();
  auto* validate_cmd =
      app.add_subcommand("validate", "Parse a config without computing");
  validate_cmd->add_option("config", validate_cfg, "Config file")->required();
  auto* version_cmd = app.add_subcommand("version", "Print version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      app.exit(e);
      return 0;
    }
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (version_cmd->parsed()) {
      std::cout << "tamq " << tamq::kVersion << "\n";
      return 0;
    }
    if (run_cmd->parsed()) return cmd_run(run_cfg, ov);
    if (scaling_cmd->parsed()) return cmd_scaling(scaling_cfg, ov);
    if (validate_cmd->parsed()) return cmd_validate(validate_cfg);
  } catch (const tamq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const tamq::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const tamq::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
