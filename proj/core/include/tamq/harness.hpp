#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tamq/config.hpp"
#include "tamq/distribution.hpp"
#include "tamq/quench.hpp"
#include "tamq/scaling.hpp"

namespace tamq {

struct ObservableResult {
  ObservableChoice choice;
  ObservableSeries series;
  Moments moments;
  EmpiricalDistribution distribution;
  std::optional<TwoModeModel> two_mode;
  std::optional<ComparisonReport> two_mode_comparison;
  std::optional<std::pair<double, double>> gaussian_fit;  // (mean, stddev)
  std::optional<ComparisonReport> gaussian_comparison;
};

struct ResultBundle {
  ExperimentConfig config;
  QuenchSpectrum spectrum;
  bool dense_path = false;
  std::vector<ObservableResult> observables;
};

// End-to-end protocol: ground state -> quench spectrum -> series -> sampling
// -> analysis. Dense path for L <= kDenseMaxSites, Lanczos above.
ResultBundle run(const ExperimentConfig& config);

// Writes spectrum/series/samples/histogram/analytic tables plus summary.txt
// into dir. Output is byte-deterministic for a fixed (config, seed).
void export_tables(const ResultBundle& bundle,
                   const std::filesystem::path& dir);

struct ScalingBundle {
  ScalingConfig config;
  std::optional<ScalingFit> weight;
  std::optional<ScalingFit> fidelity;
  std::optional<MatrixElementScaling> matrix_element;
};

ScalingBundle run_scaling(const ScalingConfig& config);
void export_scaling_tables(const ScalingBundle& bundle,
                           const std::filesystem::path& dir);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tamq
