#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "tamq/quench.hpp"

namespace tamq {

struct SamplingPlan {
  double horizon = 16000.0;   // T: times drawn uniformly from [0, T]
  int samples = 40000;        // N
  std::uint64_t rng_seed = 0;
  int bins = 101;
  std::optional<std::pair<double, double>> range;  // default: padded min/max

  void validate() const;  // throws ConfigError
  bool operator==(const SamplingPlan&) const = default;
};

struct EmpiricalDistribution {
  std::vector<double> bin_edges;   // bins+1 ascending edges
  std::vector<double> densities;   // normalized: sum density*width = 1
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  double sample_skewness = 0.0;
  double sample_excess_kurtosis = 0.0;
  SamplingPlan plan;
  std::vector<double> samples;     // raw values, in draw order
  bool degenerate = false;         // all samples equal (delta histogram)
};

// Histogram the time signal at seeded random times. Identical inputs give
// bitwise-identical results; sampling may split across threads because the
// generator is counter-based.
EmpiricalDistribution sample_signal(const ObservableSeries& series,
                                    const SamplingPlan& plan,
                                    int threads = 1);

// Three-term truncation F(t) = mean + A cos(wA t) + B cos(wB t).
struct TwoModeModel {
  double mean = 0.0;
  double amp_a = 0.0;
  double amp_b = 0.0;
  double omega_a = 0.0;
  double omega_b = 0.0;

  double support_halfwidth() const;
  // The four points where the stationary density diverges or vanishes:
  // mean +- ||A|-|B|| (log divergence) listed first, then support edges.
  std::vector<double> singular_points() const;
};

// Keep the two terms largest in |coeff|; fewer than two terms degrades to
// B = 0 (single mode) or A = B = 0 (constant signal).
TwoModeModel two_mode_fit(const ObservableSeries& series);

// Exact stationary density of the two-cosine signal with incommensurate
// frequencies: the convolution of two arcsine laws. Returns +inf exactly at
// the log-divergence points, 0 outside the support.
double two_mode_density(const TwoModeModel& model, double f);

// Matching CDF, singularity-safe (quadrature of the arcsine CDF).
double two_mode_cdf(const TwoModeModel& model, double f);

double gaussian_reference(double mean, double stddev, double f);
double gaussian_cdf(double mean, double stddev, double f);

// Analytic reference bundled for comparisons.
struct AnalyticReference {
  std::function<double(double)> density;
  std::function<double(double)> cdf;
  std::vector<double> singular_points;
};
AnalyticReference make_two_mode_reference(const TwoModeModel& model);
AnalyticReference make_gaussian_reference(double mean, double stddev);

struct ComparisonReport {
  double ks_distance = 0.0;
  double sup_norm_binned = 0.0;
};

// KS distance between the empirical CDF of the raw samples and the analytic
// CDF; sup-norm between binned densities, excluding singular bins.
ComparisonReport compare(const EmpiricalDistribution& emp,
                         const AnalyticReference& ref);

// Fixed-order Gauss-Legendre nodes/weights on [-1, 1], cached per order.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(
    int order);

}  // namespace tamq
