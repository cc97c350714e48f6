#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tamq/config.hpp"
#include "tamq/errors.hpp"
#include "tamq/harness.hpp"

namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"(# small dense experiment
[model]
sites = 6
kappa = 0.3
field = 1.4

[quench]
delta_h = 0.04

[observables]
observables = loschmidt_echo, sigma_z_site(0)

[sampling]
horizon = 4000
samples = 2000
bins = 51
rng_seed = 12345

[analysis]
two_mode = on
gaussian = on

[run]
output_dir = OUTDIR
)";

std::string with_outdir(const std::string& text, const fs::path& dir) {
  std::string out = text;
  out.replace(out.find("OUTDIR"), 6, dir.string());
  return out;
}

tamq::ExperimentConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  return tamq::parse_experiment_config(in, "<test>");
}

fs::path temp_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / ("tamq_test_" + leaf);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string cli(const std::string& args) { return std::string(TAMQ_CLI) + " " + args; }

int run_cli(const std::string& args) {
  const int rc = std::system((cli(args) + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("experiment config parses and round-trips") {
  const auto cfg = parse_text(with_outdir(kSmallConfig, "/tmp/x"));
  CHECK(cfg.model.sites == 6);
  CHECK(cfg.model.kappa == doctest::Approx(0.3));
  CHECK(cfg.model.field == doctest::Approx(1.4));
  CHECK(cfg.delta_h == doctest::Approx(0.04));
  REQUIRE(cfg.observables.size() == 2);
  CHECK(cfg.observables[0].kind ==
        tamq::ObservableChoice::Kind::loschmidt_echo);
  CHECK(cfg.observables[1].kind ==
        tamq::ObservableChoice::Kind::sigma_z_site);
  CHECK(cfg.observables[1].site == 0);
  CHECK(cfg.sampling.samples == 2000);
  CHECK(cfg.sampling.rng_seed == 12345);
  CHECK(cfg.analysis.two_mode);
  CHECK(cfg.analysis.gaussian);
  CHECK(cfg.sum_rule_accuracy == doctest::Approx(1e-4));  // default

  // Canonical text re-parses to an identical config.
  const auto again = parse_text(cfg.canonical_text());
  CHECK(again == cfg);
  const auto third = parse_text(again.canonical_text());
  CHECK(again.canonical_text() == third.canonical_text());
}

TEST_CASE("config errors carry location and are specific") {
  auto expect_error = [](const std::string& text, const std::string& frag) {
    std::istringstream in(text);
    try {
      tamq::parse_experiment_config(in, "<test>");
      FAIL_CHECK("expected ConfigError for: " << frag);
    } catch (const tamq::ConfigError& e) {
      CHECK(std::string(e.what()).find(frag) != std::string::npos);
    }
  };
  std::string base = with_outdir(kSmallConfig, "/tmp/x");

  std::string bad = base;
  bad.replace(bad.find("sites = 6"), 9, "sites = six");
  expect_error(bad, "expected an integer");

  bad = base + "\nstray = 1\n";
  expect_error(bad, "unknown key 'stray'");

  bad = base;
  bad.replace(bad.find("kappa = 0.3"), 11, "kappa = 0.3\nkappa = 0.4");
  expect_error(bad, "duplicate key");

  bad = base;
  bad.replace(bad.find("sigma_z_site(0)"), 15, "sigma_z_site(9)");
  expect_error(bad, "out of range");

  bad = base;
  bad.replace(bad.find("[model]"), 7, "[model");
  expect_error(bad, "malformed section header");

  // Line numbers are reported.
  bad = base;
  bad.replace(bad.find("samples = 2000"), 14, "samples = many");
  std::istringstream in(bad);
  try {
    tamq::parse_experiment_config(in, "<test>");
    FAIL_CHECK("expected ConfigError");
  } catch (const tamq::ConfigError& e) {
    CHECK(std::string(e.what()).find("<test>:15") != std::string::npos);
  }
}

TEST_CASE("scaling config parses, round-trips, and is detected") {
  const std::string text = R"(
[scaling]
kappa = 0
field = 1
delta_h = 0.01
sizes = 8, 10, 12
regime = critical
probes = weight, matrix_element

[run]
output_dir = /tmp/scal
)";
  std::istringstream in(text);
  const auto cfg = tamq::parse_scaling_config(in, "<test>");
  CHECK(cfg.sizes == std::vector<int>{8, 10, 12});
  CHECK(cfg.regime == tamq::Regime::critical);
  CHECK(cfg.probe_weight);
  CHECK_FALSE(cfg.probe_fidelity);
  CHECK(cfg.probe_matrix_element);
  std::istringstream in2(cfg.canonical_text());
  CHECK(tamq::parse_scaling_config(in2, "<test>") == cfg);

  const fs::path dir = temp_dir("detect");
  std::ofstream(dir / "s.cfg") << text;
  std::ofstream(dir / "e.cfg") << with_outdir(kSmallConfig, "/tmp/x");
  CHECK(tamq::is_scaling_config_file((dir / "s.cfg").string()));
  CHECK_FALSE(tamq::is_scaling_config_file((dir / "e.cfg").string()));
}

TEST_CASE("format_double round-trips and is shortest") {
  for (const double v : {0.1, 1.0 / 3.0, 1e-17, -2.5, 16000.0, 0.0}) {
    double back = 0.0;
    std::sscanf(tamq::format_double(v).c_str(), "%lf", &back);
    CHECK(back == v);
  }
  CHECK(tamq::format_double(0.5) == "0.5");
  CHECK(tamq::format_double(2.0) == "2");
}

TEST_CASE("harness end-to-end on a small dense model") {
  const fs::path dir = temp_dir("run");
  const auto cfg = parse_text(with_outdir(kSmallConfig, dir));
  const auto bundle = tamq::run(cfg);

  CHECK(bundle.dense_path);
  CHECK(bundle.spectrum.deficit <= cfg.dense_retain_accuracy);
  REQUIRE(bundle.observables.size() == 2);
  const auto& echo = bundle.observables[0];
  CHECK(echo.moments.mean > 0.0);
  CHECK(echo.moments.mean <= 1.0);
  CHECK(echo.two_mode.has_value());
  CHECK(echo.two_mode_comparison.has_value());
  CHECK(echo.gaussian_comparison.has_value());
  CHECK(echo.distribution.samples.size() == 2000);

  tamq::export_tables(bundle, dir);
  for (const char* name :
       {"spectrum.tsv", "summary.txt", "loschmidt_echo_series.tsv",
        "loschmidt_echo_samples.tsv", "loschmidt_echo_histogram.tsv",
        "loschmidt_echo_analytic.tsv", "sigma_z_site_0_series.tsv",
        "sigma_z_site_0_histogram.tsv"}) {
    CHECK(fs::exists(dir / name));
  }
  const std::string summary = slurp(dir / "summary.txt");
  CHECK(summary.find("loschmidt_echo.mean =") != std::string::npos);
  CHECK(summary.find("# config: [model]") != std::string::npos);
}

TEST_CASE("export is byte-deterministic across repeated runs") {
  const fs::path d1 = temp_dir("det1");
  const fs::path d2 = temp_dir("det2");
  auto cfg1 = parse_text(with_outdir(kSmallConfig, d1));
  auto cfg2 = cfg1;
  cfg2.output_dir = d2.string();
  tamq::export_tables(tamq::run(cfg1), d1);
  tamq::export_tables(tamq::run(cfg2), d2);
  for (const auto& entry : fs::directory_iterator(d1)) {
    const auto other = d2 / entry.path().filename();
    REQUIRE(fs::exists(other));
    // Only output_dir (echoed in provenance) may differ.
    std::string a = slurp(entry.path()), b = slurp(other);
    const std::string oa = "output_dir = " + d1.string();
    const std::string ob = "output_dir = " + d2.string();
    if (auto p = a.find(oa); p != std::string::npos) a.replace(p, oa.size(), "");
    if (auto p = b.find(ob); p != std::string::npos) b.replace(p, ob.size(), "");
    CHECK(a == b);
  }
}

TEST_CASE("changing the seed changes samples but not the spectrum") {
  const fs::path dir = temp_dir("seed");
  auto cfg = parse_text(with_outdir(kSmallConfig, dir));
  const auto a = tamq::run(cfg);
  cfg.sampling.rng_seed = 999;
  const auto b = tamq::run(cfg);
  CHECK(a.spectrum.energies == b.spectrum.energies);
  CHECK(a.observables[0].distribution.samples !=
        b.observables[0].distribution.samples);
}

TEST_CASE("CLI: version, validate, run, and exit codes") {
  const fs::path dir = temp_dir("cli");
  const fs::path cfg_path = dir / "exp.cfg";
  std::ofstream(cfg_path) << with_outdir(kSmallConfig, (dir / "out").string());

  CHECK(run_cli("version") == 0);
  CHECK(run_cli("validate " + cfg_path.string()) == 0);
  CHECK(run_cli("run " + cfg_path.string()) == 0);
  CHECK(fs::exists(dir / "out" / "summary.txt"));

  // Bad config -> 1.
  const fs::path bad_path = dir / "bad.cfg";
  std::ofstream(bad_path) << "[model]\nsites = nonsense\n";
  CHECK(run_cli("validate " + bad_path.string()) == 1);

  // Missing file -> 3 (I/O).
  CHECK(run_cli("validate " + (dir / "absent.cfg").string()) == 3);

  // Unknown subcommand -> 1.
  CHECK(run_cli("frobnicate") == 1);
}

TEST_CASE("CLI: --seed and --output-dir overrides") {
  const fs::path dir = temp_dir("cliover");
  const fs::path cfg_path = dir / "exp.cfg";
  std::ofstream(cfg_path) << with_outdir(kSmallConfig, (dir / "out").string());

  CHECK(run_cli("--seed 777 --output-dir " + (dir / "alt").string() + " run " +
                cfg_path.string()) == 0);
  CHECK(fs::exists(dir / "alt" / "summary.txt"));
  CHECK_FALSE(fs::exists(dir / "out"));
  const std::string summary = slurp(dir / "alt" / "summary.txt");
  CHECK(summary.find("# seed 777") != std::string::npos);
}
