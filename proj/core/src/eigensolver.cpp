#include "tamq/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tamq/errors.hpp"
#include "tamq/rng.hpp"

namespace tamq {

namespace {

// Sign convention: largest-magnitude component positive.
void fix_phase(Eigen::Ref<Vector> v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0.0) v = -v;
}

}  // namespace

std::vector<Eigen::Index> degenerate_clusters(const Vector& energies) {
  std::vector<Eigen::Index> starts;
  const Eigen::Index n = energies.size();
  if (n == 0) return {0};
  double width = energies[n - 1] - energies[0];
  if (width <= 0.0) width = std::max(1.0, std::abs(energies[0]));
  const double tol = kClusterTol * width;
  starts.push_back(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    if (energies[i] - energies[i - 1] > tol) starts.push_back(i);
  }
  starts.push_back(n);
  return starts;
}

EigenSystem dense_spectrum(const HamiltonianOperator& H) {
  if (H.spec().sites > kDenseMaxSites) {
    throw NumericalError("dense_spectrum: refusing L > " +
                         std::to_string(kDenseMaxSites));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(H.dense());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("dense_spectrum: eigensolver failed");
  }
  EigenSystem sys;
  sys.source = EigenSource::dense;
  sys.energies = solver.eigenvalues();
  sys.vectors = solver.eigenvectors();
  for (Eigen::Index j = 0; j < sys.vectors.cols(); ++j) {
    fix_phase(sys.vectors.col(j));
  }
  // Backward-stable dense solve: residuals at round-off scale.
  const double scale = sys.energies.cwiseAbs().maxCoeff();
  sys.residuals = Vector::Constant(
      sys.energies.size(),
      std::numeric_limits<double>::epsilon() * scale *
          std::sqrt(static_cast<double>(sys.energies.size())));
  return sys;
}

Vector even_sector_seed(int sites, std::uint64_t seed) {
  const std::size_t dim = std::size_t{1} << sites;
  Vector v(static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < dim; ++s) {
    v[static_cast<Eigen::Index>(s)] =
        (popcount64(s) % 2 == 0) ? uniform_sym(seed, s) : 0.0;
  }
  v.normalize();
  return v;
}

LanczosIteration::LanczosIteration(std::size_t dim, MatVec matvec, Vector seed,
                                   bool reorthogonalize)
    : dim_(dim), matvec_(std::move(matvec)), reorth_(reorthogonalize) {
  if (static_cast<std::size_t>(seed.size()) != dim_) {
    throw NumericalError("LanczosIteration: seed dimension mismatch");
  }
  const double norm = seed.norm();
  if (norm < 1e-14) {
    throw NumericalError("LanczosIteration: zero seed vector");
  }
  seed /= norm;

  push_basis(seed);
  Vector w;
  matvec_(seed, w);
  const double a = seed.dot(w);
  w -= a * seed;
  if (reorth_) {
    w -= seed * seed.dot(w);
  }
  alpha_.push_back(a);
  next_ = std::move(w);
}

void LanczosIteration::push_basis(const Vector& v) {
  if (count_ == basis_.cols()) {
    const Eigen::Index grown = std::max<Eigen::Index>(32, 2 * basis_.cols());
    basis_.conservativeResize(static_cast<Eigen::Index>(dim_), grown);
  }
  basis_.col(count_++) = v;
}

bool LanczosIteration::step() {
  if (exhausted_) return false;
  const double b = next_.norm();
  // Relative breakdown test: the Krylov space is (numerically) invariant.
  if (b < 1e-13 * std::max(1.0, std::abs(alpha_.back()))) {
    exhausted_ = true;
    return false;
  }
  beta_.push_back(b);
  push_basis(next_ / b);

  Vector w;
  matvec_(basis_.col(count_ - 1), w);
  const double a = basis_.col(count_ - 1).dot(w);
  w -= a * basis_.col(count_ - 1);
  w -= beta_.back() * basis_.col(count_ - 2);
  if (reorth_) {
    // Two passes of classical Gram-Schmidt against the whole basis, done as
    // matrix-vector products.
    const auto Q = basis_.leftCols(count_);
    w.noalias() -= Q * (Q.transpose() * w).eval();
    w.noalias() -= Q * (Q.transpose() * w).eval();
  }
  alpha_.push_back(a);
  next_ = std::move(w);
  return true;
}

LanczosIteration::Ritz LanczosIteration::analyze() const {
  const auto k = static_cast<Eigen::Index>(alpha_.size());
  Matrix T = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    T(i, i) = alpha_[static_cast<std::size_t>(i)];
    if (i + 1 < k) {
      T(i, i + 1) = T(i + 1, i) = beta_[static_cast<std::size_t>(i)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(T);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("LanczosIteration: tridiagonal solve failed");
  }
  Ritz r;
  r.values = solver.eigenvalues();
  r.tri_vectors = solver.eigenvectors();
  const double bnext = exhausted_ ? 0.0 : next_.norm();
  r.residual_estimates = (bnext * r.tri_vectors.row(k - 1)).cwiseAbs();
  return r;
}

Vector LanczosIteration::ritz_vector(const Ritz& r, Eigen::Index idx) const {
  Vector v = basis_.leftCols(count_) * r.tri_vectors.col(idx);
  v.normalize();
  fix_phase(v);
  return v;
}

EigenSystem lanczos_lowest(std::size_t dim, const MatVec& matvec,
                           const LanczosConfig& cfg) {
  if (cfg.residual_tol <= 0.0) {
    throw ConfigError("LanczosConfig: residual_tol must be positive");
  }
  if (cfg.max_krylov < cfg.target_count) {
    throw ConfigError("LanczosConfig: max_krylov < target_count");
  }
  if (dim < static_cast<std::size_t>(cfg.target_count)) {
    throw ConfigError("lanczos_lowest: target_count exceeds dimension");
  }

  Vector seed;
  if (cfg.seed_vector) {
    seed = *cfg.seed_vector;
  } else {
    seed.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      seed[static_cast<Eigen::Index>(i)] = uniform_sym(0x5eedULL, i);
    }
  }

  LanczosIteration it(dim, matvec, std::move(seed), cfg.reorthogonalize);

  auto converged_count = [&](const LanczosIteration::Ritz& r) {
    const Eigen::Index want =
        std::min<Eigen::Index>(cfg.target_count, r.values.size());
    Eigen::Index n = 0;
    for (Eigen::Index i = 0; i < want; ++i) {
      if (r.residual_estimates[i] <= cfg.residual_tol) ++n;
    }
    return n;
  };

  LanczosIteration::Ritz ritz = it.analyze();
  while (!it.exhausted() && it.size() < cfg.max_krylov &&
         converged_count(ritz) < std::min<Eigen::Index>(cfg.target_count,
                                                        ritz.values.size())) {
    for (int s = 0; s < 5 && it.step(); ++s) {
    }
    ritz = it.analyze();
  }

  const Eigen::Index avail =
      std::min<Eigen::Index>(cfg.target_count, ritz.values.size());
  if (!it.exhausted() && converged_count(ritz) < avail) {
    std::ostringstream msg;
    msg << "lanczos_lowest: no convergence within max_krylov=" << cfg.max_krylov
        << "; best residuals:";
    for (Eigen::Index i = 0; i < avail; ++i) {
      msg << ' ' << ritz.residual_estimates[i];
    }
    throw NumericalError(msg.str());
  }

  EigenSystem sys;
  sys.source = EigenSource::lanczos;
  sys.energies.resize(avail);
  sys.vectors.resize(static_cast<Eigen::Index>(dim), avail);
  sys.residuals.resize(avail);
  Vector hv;
  for (Eigen::Index i = 0; i < avail; ++i) {
    sys.energies[i] = ritz.values[i];
    sys.vectors.col(i) = it.ritz_vector(ritz, i);
    matvec(sys.vectors.col(i), hv);
    sys.residuals[i] = (hv - ritz.values[i] * sys.vectors.col(i)).norm();
  }
  return sys;
}

EigenSystem lanczos_lowest(const HamiltonianOperator& H,
                           const LanczosConfig& cfg) {
  return lanczos_lowest(
      H.dimension(),
      [&H](const Vector& in, Vector& out) { H.apply(in, out); }, cfg);
}

std::pair<double, Vector> ground_state(const HamiltonianOperator& H) {
  // Dense up to L=10; above that a single Lanczos run with a deterministic
  // even-sector seed is much cheaper and equally reliable.
  if (H.spec().sites <= 10) {
    const Matrix Hm = H.dense();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(Hm);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("ground_state: dense eigensolver failed");
    }
    Vector v = solver.eigenvectors().col(0);
    fix_phase(v);
    return {solver.eigenvalues()[0], std::move(v)};
  }
  LanczosConfig cfg;
  cfg.target_count = 1;
  cfg.residual_tol = 1e-11;
  cfg.max_krylov = 500;
  cfg.seed_vector = even_sector_seed(H.spec().sites);
  EigenSystem sys = lanczos_lowest(H, cfg);
  return {sys.energies[0], sys.vectors.col(0)};
}

}  // namespace tamq
