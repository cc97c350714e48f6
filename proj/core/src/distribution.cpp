#include "tamq/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "tamq/errors.hpp"
#include "tamq/rng.hpp"

namespace tamq {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

void SamplingPlan::validate() const {
  if (!(horizon > 0.0)) throw ConfigError("SamplingPlan: horizon must be > 0");
  if (samples < 100) throw ConfigError("SamplingPlan: samples must be >= 100");
  if (bins < 3) throw ConfigError("SamplingPlan: bins must be >= 3");
  if (range && !(range->first < range->second)) {
    throw ConfigError("SamplingPlan: range must satisfy lo < hi");
  }
}

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(
    int order) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>>
      cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  // Newton iteration on Legendre polynomials, symmetric roots.
  std::vector<double> x(order), w(order);
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[order - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[order - 1 - i] = w[i];
  }
  return cache.emplace(order, std::make_pair(std::move(x), std::move(w)))
      .first->second;
}

namespace {

// integral of fn over [a, b] with fixed-order Gauss-Legendre
double gl_integrate(double a, double b, int order,
                    const std::function<double(double)>& fn) {
  const auto& [x, w] = gauss_legendre(order);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum += w[i] * fn(c + h * x[i]);
  }
  return sum * h;
}

}  // namespace

EmpiricalDistribution sample_signal(const ObservableSeries& series,
                                    const SamplingPlan& plan, int threads) {
  plan.validate();
  if (threads < 1) threads = 1;

  const int n = plan.samples;
  std::vector<double> values(static_cast<std::size_t>(n));

  // Packed copies of the series for the hot loop.
  const std::size_t nterms = series.terms.size();
  std::vector<double> omega(nterms), coeff(nterms);
  for (std::size_t k = 0; k < nterms; ++k) {
    omega[k] = series.terms[k].omega;
    coeff[k] = series.terms[k].coeff;
  }

  auto worker = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      const double t =
          uniform01(plan.rng_seed, static_cast<std::uint64_t>(i)) *
          plan.horizon;
      double v = series.mean;
      for (std::size_t k = 0; k < nterms; ++k) {
        v += coeff[k] * std::cos(omega[k] * t);
      }
      values[static_cast<std::size_t>(i)] = v;
    }
  };
  if (threads == 1) {
    worker(0, n);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int lo = t * chunk;
      const int hi = std::min(n, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  EmpiricalDistribution emp;
  emp.plan = plan;
  emp.samples = values;

  // Moments from the raw samples.
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (const double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  emp.sample_mean = mean;
  emp.sample_variance = m2;
  if (m2 > 0.0) {
    emp.sample_skewness = m3 / std::pow(m2, 1.5);
    emp.sample_excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }

  double lo, hi;
  if (plan.range) {
    lo = plan.range->first;
    hi = plan.range->second;
  } else {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double span = *mx - *mn;
    lo = *mn - 0.01 * span;
    hi = *mx + 0.01 * span;
  }
  if (!(hi > lo)) {
    // All samples identical: delta histogram.
    emp.degenerate = true;
    const double v = values.front();
    const double eps = std::max(1e-12, std::abs(v) * 1e-12);
    emp.bin_edges = {v - eps, v + eps};
    emp.densities = {1.0 / (2.0 * eps)};
    return emp;
  }

  const int nb = plan.bins;
  emp.bin_edges.resize(static_cast<std::size_t>(nb) + 1);
  for (int b = 0; b <= nb; ++b) {
    emp.bin_edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / nb;
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(nb), 0);
  std::size_t in_range = 0;
  for (const double v : values) {
    if (v < lo || v >= hi) {
      if (v == hi) {  // closed top edge
        ++counts.back();
        ++in_range;
      }
      continue;
    }
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * nb);
    if (b >= counts.size()) b = counts.size() - 1;
    ++counts[b];
    ++in_range;
  }
  emp.densities.resize(counts.size());
  const double width = (hi - lo) / nb;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    emp.densities[b] =
        in_range ? static_cast<double>(counts[b]) / (in_range * width) : 0.0;
  }
  return emp;
}

double TwoModeModel::support_halfwidth() const {
  return std::abs(amp_a) + std::abs(amp_b);
}

std::vector<double> TwoModeModel::singular_points() const {
  const double inner = std::abs(std::abs(amp_a) - std::abs(amp_b));
  const double outer = support_halfwidth();
  return {mean - inner, mean + inner, mean - outer, mean + outer};
}

TwoModeModel two_mode_fit(const ObservableSeries& series) {
  TwoModeModel model;
  model.mean = series.mean;
  if (series.terms.empty()) return model;

  std::vector<std::size_t> order(series.terms.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(series.terms[a].coeff) > std::abs(series.terms[b].coeff);
  });
  model.amp_a = series.terms[order[0]].coeff;
  model.omega_a = series.terms[order[0]].omega;
  if (order.size() > 1) {
    model.amp_b = series.terms[order[1]].coeff;
    model.omega_b = series.terms[order[1]].omega;
  }
  return model;
}

double two_mode_density(const TwoModeModel& model, double f) {
  if (std::isnan(f)) throw NumericalError("two_mode_density: NaN input");
  double a = std::abs(model.amp_a);
  double b = std::abs(model.amp_b);
  if (a < b) std::swap(a, b);
  const double u = f - model.mean;
  if (a <= 0.0) {
    throw NumericalError("two_mode_density: |A| must be positive");
  }

  if (b < 1e-15) {
    // Single-mode arcsine law.
    if (std::abs(u) >= a) return std::abs(u) == a ? kInf : 0.0;
    return 1.0 / (kPi * std::sqrt(a * a - u * u));
  }

  if (std::abs(u) > a + b) return 0.0;
  // Logarithmic divergence at |u| = a - b; a rounding-width window stands in
  // for exact equality so f = mean +- ||A|-|B|| computed in floating point
  // still hits the sentinel.
  if (std::abs(std::abs(u) - (a - b)) <= 4e-16 * (a + b)) return kInf;

  // Convolution integral over w = B cos(component): the admissible window is
  // the overlap of |w| <= b with |u - w| <= a. Each endpoint carries an
  // inverse-square-root singularity from exactly one factor; a sine
  // substitution on the binding factor removes it.
  const double lo = std::max(-b, u - a);
  const double hi = std::min(b, u + a);
  if (!(hi > lo)) return 0.0;
  const double mid = 0.5 * (lo + hi);

  auto half = [&](double from, double to, bool b_binds) {
    // Integrand 1 / (sqrt(b^2-w^2) sqrt(a^2-(u-w)^2)) over [from, to];
    // b_binds says which factor is singular at the binding endpoint.
    if (b_binds) {
      // w = b sin(phi): kills the sqrt(b^2 - w^2) endpoint singularity.
      const double p0 = std::asin(std::clamp(from / b, -1.0, 1.0));
      const double p1 = std::asin(std::clamp(to / b, -1.0, 1.0));
      return gl_integrate(p0, p1, 256, [&](double phi) {
        const double w = b * std::sin(phi);
        const double q = a * a - (u - w) * (u - w);
        return q > 0.0 ? 1.0 / std::sqrt(q) : 0.0;
      });
    }
    // u - w = a sin(theta): kills the sqrt(a^2 - (u-w)^2) singularity.
    const double t0 = std::asin(std::clamp((u - to) / a, -1.0, 1.0));
    const double t1 = std::asin(std::clamp((u - from) / a, -1.0, 1.0));
    return gl_integrate(t0, t1, 256, [&](double theta) {
      const double w = u - a * std::sin(theta);
      const double q = b * b - w * w;
      return q > 0.0 ? 1.0 / std::sqrt(q) : 0.0;
    });
  };

  const double integral = half(lo, mid, -b >= u - a) +
                          half(mid, hi, b <= u + a);
  return integral / (kPi * kPi);
}

namespace {

// Arcsine CDF for amplitude amp (> 0).
double arcsine_cdf(double amp, double y) {
  if (y <= -amp) return 0.0;
  if (y >= amp) return 1.0;
  return 0.5 + std::asin(y / amp) / kPi;
}

}  // namespace

double two_mode_cdf(const TwoModeModel& model, double f) {
  if (std::isnan(f)) throw NumericalError("two_mode_cdf: NaN input");
  double a = std::abs(model.amp_a);
  double b = std::abs(model.amp_b);
  if (a < b) std::swap(a, b);
  const double u = f - model.mean;
  if (a <= 0.0) return u >= 0.0 ? 1.0 : 0.0;
  if (b < 1e-15) return arcsine_cdf(a, u);
  if (u <= -(a + b)) return 0.0;
  if (u >= a + b) return 1.0;

  // cdf(u) = (1/pi) int_0^pi CDF_B(u - a cos(phi)) dphi,
  // split where the inner CDF hits its support edges.
  std::vector<double> cuts = {0.0, kPi};
  for (const double target : {u - b, u + b}) {
    const double c = target / a;
    if (c > -1.0 && c < 1.0) cuts.push_back(std::acos(c));
  }
  std::sort(cuts.begin(), cuts.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += gl_integrate(cuts[i], cuts[i + 1], 64, [&](double phi) {
      return arcsine_cdf(b, u - a * std::cos(phi));
    });
  }
  return std::clamp(total / kPi, 0.0, 1.0);
}

double gaussian_reference(double mean, double stddev, double f) {
  if (!(stddev > 0.0)) {
    throw ConfigError("gaussian_reference: stddev must be positive");
  }
  const double z = (f - mean) / stddev;
  return std::exp(-0.5 * z * z) / (stddev * std::sqrt(2.0 * kPi));
}

double gaussian_cdf(double mean, double stddev, double f) {
  if (!(stddev > 0.0)) {
    throw ConfigError("gaussian_cdf: stddev must be positive");
  }
  return 0.5 * std::erfc(-(f - mean) / (stddev * std::sqrt(2.0)));
}

AnalyticReference make_two_mode_reference(const TwoModeModel& model) {
  AnalyticReference ref;
  ref.density = [model](double f) { return two_mode_density(model, f); };
  ref.cdf = [model](double f) { return two_mode_cdf(model, f); };
  ref.singular_points = model.singular_points();
  return ref;
}

AnalyticReference make_gaussian_reference(double mean, double stddev) {
  if (!(stddev > 0.0)) {
    throw ConfigError("make_gaussian_reference: stddev must be positive");
  }
  AnalyticReference ref;
  ref.density = [mean, stddev](double f) {
    return gaussian_reference(mean, stddev, f);
  };
  ref.cdf = [mean, stddev](double f) { return gaussian_cdf(mean, stddev, f); };
  return ref;
}

ComparisonReport compare(const EmpiricalDistribution& emp,
                         const AnalyticReference& ref) {
  if (emp.samples.empty()) {
    throw NumericalError("compare: empirical distribution has no samples");
  }
  std::vector<double> sorted = emp.samples;
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());

  // Sanity: the analytic CDF must span ~[0, 1] over the sample range.
  const double mass =
      ref.cdf(sorted.back()) - ref.cdf(sorted.front());
  if (!(mass >= -1e-9) || mass > 1.0 + 1e-6) {
    throw NumericalError("compare: analytic reference is not normalizable");
  }

  ComparisonReport report;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double F = ref.cdf(sorted[i]);
    const double d = std::max((i + 1) / n - F, F - i / n);
    report.ks_distance = std::max(report.ks_distance, d);
  }

  for (std::size_t b = 0; b + 1 < emp.bin_edges.size(); ++b) {
    const double lo = emp.bin_edges[b];
    const double hi = emp.bin_edges[b + 1];
    const bool singular =
        std::any_of(ref.singular_points.begin(), ref.singular_points.end(),
                    [&](double s) { return s >= lo && s < hi; });
    if (singular) continue;
    const double width = hi - lo;
    const double analytic = (ref.cdf(hi) - ref.cdf(lo)) / width;
    report.sup_norm_binned = std::max(
        report.sup_norm_binned, std::abs(emp.densities[b] - analytic));
  }
  return report;
}

}  // namespace tamq
