#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tamq/distribution.hpp"
#include "tamq/hamiltonian.hpp"
#include "tamq/scaling.hpp"

namespace tamq {

struct ObservableChoice {
  enum class Kind { loschmidt_echo, sigma_z_site };
  Kind kind = Kind::loschmidt_echo;
  int site = 0;  // sigma_z_site only

  std::string name() const;
  bool operator==(const ObservableChoice&) const = default;
};

struct AnalysisSet {
  bool two_mode = false;
  bool gaussian = false;
  bool operator==(const AnalysisSet&) const = default;
};

// Parsed `key = value` experiment file with [section] headers.
struct ExperimentConfig {
  HamiltonianSpec model;
  double delta_h = 0.0;
  std::vector<ObservableChoice> observables;
  SamplingPlan sampling;
  AnalysisSet analysis;
  double sum_rule_accuracy = 1e-4;      // Lanczos sum-rule stopping
  double dense_retain_accuracy = 1e-9;  // dense-path weight retention
  int max_krylov = 400;
  std::string output_dir;
  int threads = 1;

  void validate() const;
  // Canonical text form; re-parses to an equal config (provenance echo).
  std::string canonical_text() const;
  bool operator==(const ExperimentConfig&) const = default;
};

struct ScalingConfig {
  double kappa = 0.0;
  double field = 0.0;
  double delta_h = 0.0;
  std::vector<int> sizes;
  Regime regime = Regime::critical;
  bool probe_weight = false;
  bool probe_fidelity = false;
  bool probe_matrix_element = false;
  double sum_rule_accuracy = 1e-3;
  int max_krylov = 400;
  std::string output_dir;

  void validate() const;
  std::string canonical_text() const;
  bool operator==(const ScalingConfig&) const = default;
};

// Parse; errors carry the offending field and line number.
ExperimentConfig parse_experiment_config(std::istream& in,
                                         const std::string& source_name);
ExperimentConfig parse_experiment_config_file(const std::string& path);
ScalingConfig parse_scaling_config(std::istream& in,
                                   const std::string& source_name);
ScalingConfig parse_scaling_config_file(const std::string& path);

// True if the file contains a [scaling] section.
bool is_scaling_config_file(const std::string& path);

// Shortest round-trippable decimal representation helpers used by the
// exporters; all output files are byte-deterministic.
std::string format_double(double v);

}  // namespace tamq
