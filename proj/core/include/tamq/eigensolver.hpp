#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "tamq/hamiltonian.hpp"

namespace tamq {

using MatVec = std::function<void(const Vector&, Vector&)>;

enum class EigenSource { dense, lanczos };

// Retained eigenpairs, energies ascending, vectors as matrix columns.
struct EigenSystem {
  Vector energies;
  Matrix vectors;
  Vector residuals;   // ||H v - E v|| per pair
  EigenSource source = EigenSource::dense;

  Eigen::Index count() const { return energies.size(); }
};

struct LanczosConfig {
  int max_krylov = 400;
  double residual_tol = 1e-10;
  bool reorthogonalize = true;
  std::optional<Vector> seed_vector;
  int target_count = 1;
};

// Relative gap below which eigenvalues are grouped as one degenerate cluster.
inline constexpr double kClusterTol = 1e-10;

// Groups ascending energies into clusters of near-degenerate levels; returns
// the start index of each cluster plus a final sentinel equal to count.
std::vector<Eigen::Index> degenerate_clusters(const Vector& energies);

// Full spectrum by dense diagonalization; refuses L > kDenseMaxSites.
// Eigenvector phases fixed so the largest-magnitude component is positive.
EigenSystem dense_spectrum(const HamiltonianOperator& H);

// Lowest Ritz pairs of a real symmetric operator by Lanczos with full
// reorthogonalization. With a seed vector, iterations stay in the Krylov
// space of the seed, so only eigenstates overlapping the seed appear.
EigenSystem lanczos_lowest(std::size_t dim, const MatVec& matvec,
                           const LanczosConfig& cfg);
EigenSystem lanczos_lowest(const HamiltonianOperator& H,
                           const LanczosConfig& cfg);

// Ground energy and state; dense path for L <= kDenseMaxSites, else Lanczos
// with a deterministic pseudo-random seed restricted to the spin-flip-even
// sector (the TAM ground state sector for the phases studied here).
std::pair<double, Vector> ground_state(const HamiltonianOperator& H);

// Deterministic Lanczos seed: pseudo-random amplitudes on the even spin-flip
// sector (even number of down spins), unit norm.
Vector even_sector_seed(int sites, std::uint64_t seed = 0x7a3c9d1fULL);

// Incremental Lanczos, exposed so the quench engine can grow the Krylov
// space until a spectral-weight stopping rule is met.
class LanczosIteration {
 public:
  LanczosIteration(std::size_t dim, MatVec matvec, Vector seed,
                   bool reorthogonalize = true);

  // One Lanczos step; returns false once the Krylov space is exhausted
  // (invariant subspace found).
  bool step();

  int size() const { return static_cast<int>(alpha_.size()); }
  bool exhausted() const { return exhausted_; }

  struct Ritz {
    Vector values;                 // ascending
    Matrix tri_vectors;            // eigenvectors of the tridiagonal matrix
    Vector residual_estimates;     // |beta_k * last component|
  };
  Ritz analyze() const;

  // Ritz vector in the original space, unit norm.
  Vector ritz_vector(const Ritz& r, Eigen::Index idx) const;

 private:
  void push_basis(const Vector& v);

  std::size_t dim_;
  MatVec matvec_;
  bool reorth_;
  bool exhausted_ = false;
  Matrix basis_;                  // columns 0..count_-1 are the Lanczos basis
  Eigen::Index count_ = 0;
  std::vector<double> alpha_;
  std::vector<double> beta_;      // beta_[k] couples basis cols k and k+1
  Vector next_;                   // candidate basis vector (unnormalized)
};

}  // namespace tamq
