#include "tamq/quench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tamq/errors.hpp"

namespace tamq {

void QuenchSpec::validate() const {
  pre.validate();
  post.validate();
  if (pre.sites != post.sites || pre.kappa != post.kappa ||
      pre.boundary != post.boundary) {
    throw ConfigError(
        "QuenchSpec: pre and post may differ only in the transverse field");
  }
}

namespace {

double frequency_merge_tol(const Vector& energies) {
  if (energies.size() < 2) return 1e-12;
  double width = energies[energies.size() - 1] - energies[0];
  if (width <= 0.0) width = 1.0;
  return 1e-10 * width;
}

// Sort raw (omega, coeff) terms, fold |omega| <= tol into the mean
// (exactly degenerate gaps give constant terms), merge equal frequencies.
void merge_terms(std::vector<ObservableSeries::Term>& raw, double tol,
                 ObservableSeries& out) {
  std::sort(raw.begin(), raw.end(),
            [](const auto& a, const auto& b) { return a.omega < b.omega; });
  for (const auto& t : raw) {
    if (t.omega <= tol) {
      out.mean += t.coeff;
      continue;
    }
    if (!out.terms.empty() && t.omega - out.terms.back().omega <= tol) {
      out.terms.back().coeff += t.coeff;
    } else {
      out.terms.push_back(t);
    }
  }
  // Prune coefficients that cancelled to round-off.
  std::erase_if(out.terms,
                [](const auto& t) { return std::abs(t.coeff) < 1e-15; });
}

QuenchSpectrum make_spectrum(const EigenSystem& eig, const Vector& psi0,
                             double ground_energy_pre) {
  QuenchSpectrum qs;
  qs.energies = eig.energies;
  qs.overlaps = eig.vectors.transpose() * psi0;
  qs.weights = qs.overlaps.array().square();
  qs.deficit = 1.0 - qs.weights.sum();
  qs.ground_energy_pre = ground_energy_pre;
  return qs;
}

}  // namespace

QuenchResult quench_spectrum(const QuenchSpec& q, double sum_rule_accuracy,
                             const LanczosConfig& base) {
  q.validate();
  if (!(sum_rule_accuracy > 0.0 && sum_rule_accuracy < 0.1)) {
    throw ConfigError("quench_spectrum: sum_rule_accuracy must be in (0, 0.1)");
  }

  HamiltonianOperator H1(q.pre);
  HamiltonianOperator H2(q.post);
  auto [e0_pre, psi0] = ground_state(H1);

  LanczosIteration it(
      H2.dimension(),
      [&H2](const Vector& in, Vector& out) { H2.apply(in, out); }, psi0,
      base.reorthogonalize);

  const double tol = base.residual_tol;
  double best_deficit = 1.0;
  LanczosIteration::Ritz ritz = it.analyze();
  std::vector<Eigen::Index> converged;

  auto recheck = [&]() {
    converged.clear();
    double captured = 0.0;
    for (Eigen::Index i = 0; i < ritz.values.size(); ++i) {
      if (ritz.residual_estimates[i] <= tol) {
        converged.push_back(i);
        // c_n = first tridiagonal eigenvector component since q0 = psi0.
        const double c = ritz.tri_vectors(0, i);
        captured += c * c;
      }
    }
    best_deficit = 1.0 - captured;
    return best_deficit <= sum_rule_accuracy;
  };

  bool done = recheck();
  while (!done && !it.exhausted() && it.size() < base.max_krylov) {
    // Re-solving the tridiagonal costs O(k^3); amortize it by growing the
    // space in chunks that scale with the current size.
    const int chunk = std::max(5, it.size() / 8);
    for (int s = 0; s < chunk && it.size() < base.max_krylov && it.step();
         ++s) {
    }
    ritz = it.analyze();
    done = recheck();
  }
  if (it.exhausted()) {
    // Invariant subspace: every Ritz pair is exact within round-off.
    converged.clear();
    for (Eigen::Index i = 0; i < ritz.values.size(); ++i) {
      converged.push_back(i);
    }
    done = true;
  }
  if (!done) {
    std::ostringstream msg;
    msg << "quench_spectrum: sum rule not reached within max_krylov="
        << base.max_krylov << "; achieved deficit " << best_deficit;
    throw NumericalError(msg.str());
  }

  QuenchResult res;
  res.eig.source = EigenSource::lanczos;
  const auto k = static_cast<Eigen::Index>(converged.size());
  res.eig.energies.resize(k);
  res.eig.vectors.resize(psi0.size(), k);
  res.eig.residuals.resize(k);
  Vector hv;
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index idx = converged[static_cast<std::size_t>(i)];
    res.eig.energies[i] = ritz.values[idx];
    res.eig.vectors.col(i) = it.ritz_vector(ritz, idx);
    H2.apply(res.eig.vectors.col(i), hv);
    res.eig.residuals[i] =
        (hv - res.eig.energies[i] * res.eig.vectors.col(i)).norm();
  }
  res.spectrum = make_spectrum(res.eig, psi0, e0_pre);
  res.initial_state = std::move(psi0);
  return res;
}

QuenchResult quench_spectrum_dense(const QuenchSpec& q,
                                   double retain_accuracy) {
  q.validate();
  HamiltonianOperator H1(q.pre);
  HamiltonianOperator H2(q.post);
  auto [e0_pre, psi0] = ground_state(H1);
  EigenSystem full = dense_spectrum(H2);

  const Vector c = full.vectors.transpose() * psi0;
  const Vector p = c.array().square();

  // Retain the largest weights until the deficit target is met.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&p](Eigen::Index a, Eigen::Index b) { return p[a] > p[b]; });
  double captured = 0.0;
  std::vector<Eigen::Index> keep;
  for (const Eigen::Index i : order) {
    keep.push_back(i);
    captured += p[i];
    if (1.0 - captured <= retain_accuracy) break;
  }
  std::sort(keep.begin(), keep.end());  // weights sorted by energy

  QuenchResult res;
  res.eig.source = EigenSource::dense;
  const auto k = static_cast<Eigen::Index>(keep.size());
  res.eig.energies.resize(k);
  res.eig.vectors.resize(psi0.size(), k);
  res.eig.residuals.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index idx = keep[static_cast<std::size_t>(i)];
    res.eig.energies[i] = full.energies[idx];
    res.eig.vectors.col(i) = full.vectors.col(idx);
    res.eig.residuals[i] = full.residuals[idx];
  }
  res.spectrum = make_spectrum(res.eig, psi0, e0_pre);
  res.initial_state = std::move(psi0);
  return res;
}

PerturbativeWeights perturbative_weights(const EigenSystem& eig,
                                         const Observable& V,
                                         double delta_lambda) {
  const auto clusters = degenerate_clusters(eig.energies);
  for (std::size_t ci = 0; ci + 1 < clusters.size(); ++ci) {
    if (clusters[ci + 1] - clusters[ci] > 1) {
      std::ostringstream msg;
      msg << "perturbative_weights: degenerate cluster at levels "
          << clusters[ci] << ".." << clusters[ci + 1] - 1 << " (E="
          << eig.energies[clusters[ci]] << ")";
      throw NumericalError(msg.str());
    }
  }

  const Eigen::Index k = eig.count();
  PerturbativeWeights out;
  out.weights.assign(static_cast<std::size_t>(k), 0.0);
  const Vector v0 = eig.vectors.col(0);
  const Vector Vv0 = V.apply(v0);
  const double vmean = v0.dot(Vv0);
  const double vsq = Vv0.squaredNorm();  // <0|V^2|0>

  double chi = 0.0;
  double captured = 0.0;
  for (Eigen::Index n = 1; n < k; ++n) {
    const double me = eig.vectors.col(n).dot(Vv0);
    const double gap = eig.energies[n] - eig.energies[0];
    chi += me * me / (gap * gap);
    captured += me * me;
    out.weights[static_cast<std::size_t>(n)] =
        delta_lambda * delta_lambda * me * me / (gap * gap);
  }
  out.weights[0] = 1.0 - delta_lambda * delta_lambda * chi;
  out.remainder = (vsq - vmean * vmean) - captured;
  return out;
}

ObservableSeries observable_series(const QuenchSpectrum& qs,
                                   const EigenSystem& eig,
                                   const Observable& O) {
  if (qs.energies.size() != eig.count() ||
      (qs.energies - eig.energies).cwiseAbs().maxCoeff() >
          frequency_merge_tol(qs.energies)) {
    throw NumericalError("observable_series: inconsistent retained sets");
  }
  const Eigen::Index k = eig.count();

  // O in the retained eigenbasis.
  Matrix OV(eig.vectors.rows(), k);
  Vector tmp;
  for (Eigen::Index j = 0; j < k; ++j) {
    O.apply(eig.vectors.col(j), tmp);
    OV.col(j) = tmp;
  }
  const Matrix M = eig.vectors.transpose() * OV;

  ObservableSeries series;
  series.deficit = qs.deficit;
  for (Eigen::Index n = 0; n < k; ++n) {
    series.mean += qs.weights[n] * M(n, n);
  }
  std::vector<ObservableSeries::Term> raw;
  raw.reserve(static_cast<std::size_t>(k) * (k - 1) / 2);
  for (Eigen::Index n = 1; n < k; ++n) {
    for (Eigen::Index m = 0; m < n; ++m) {
      const double coeff = 2.0 * M(n, m) * qs.overlaps[m] * qs.overlaps[n];
      if (coeff != 0.0) {
        raw.push_back({qs.energies[n] - qs.energies[m], coeff});
      }
    }
  }
  merge_terms(raw, frequency_merge_tol(qs.energies), series);
  return series;
}

ObservableSeries loschmidt_series(const QuenchSpectrum& qs) {
  ObservableSeries series;
  series.deficit = qs.deficit;
  const Eigen::Index k = qs.weights.size();
  series.mean = qs.weights.array().square().sum();
  std::vector<ObservableSeries::Term> raw;
  raw.reserve(static_cast<std::size_t>(k) * (k - 1) / 2);
  for (Eigen::Index n = 1; n < k; ++n) {
    for (Eigen::Index m = 0; m < n; ++m) {
      const double coeff = 2.0 * qs.weights[n] * qs.weights[m];
      if (coeff != 0.0) {
        raw.push_back({qs.energies[n] - qs.energies[m], coeff});
      }
    }
  }
  merge_terms(raw, frequency_merge_tol(qs.energies), series);
  return series;
}

double evaluate(const ObservableSeries& series, double t) {
  if (!std::isfinite(t)) {
    throw NumericalError("evaluate: time must be finite");
  }
  double v = series.mean;
  for (const auto& term : series.terms) {
    v += term.coeff * std::cos(term.omega * t);
  }
  return v;
}

Moments exact_moments(const ObservableSeries& series) {
  Moments m;
  m.mean = series.mean;
  for (const auto& term : series.terms) {
    m.variance += 0.5 * term.coeff * term.coeff;
  }
  return m;
}

double fidelity(const QuenchSpec& q) {
  q.validate();
  HamiltonianOperator H1(q.pre);
  HamiltonianOperator H2(q.post);
  const auto [e1, g1] = ground_state(H1);
  const auto [e2, g2] = ground_state(H2);
  (void)e1;
  (void)e2;
  return std::abs(g1.dot(g2));
}

}  // namespace tamq
