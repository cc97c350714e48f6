#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

namespace tamq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Boundary { periodic };

// Couplings of the transverse-field Ising chain with frustrating
// next-nearest-neighbor bonds:
//   H = -sum_i (sx_i sx_{i+1} - kappa sx_i sx_{i+2} + h sz_i),  indices mod L.
struct HamiltonianSpec {
  int sites = 0;           // L >= 3
  double kappa = 0.0;      // next-nearest frustration
  double field = 0.0;      // transverse field h
  Boundary boundary = Boundary::periodic;

  void validate() const;   // throws ConfigError
  bool operator==(const HamiltonianSpec&) const = default;
};

// Largest L for which a dense 2^L x 2^L matrix may be materialized.
inline constexpr int kDenseMaxSites = 12;

// Matrix-free real symmetric operator on the 2^L computational basis.
// Bit i of the basis index is site i; bit value 0 <-> sz = +1, 1 <-> sz = -1.
class HamiltonianOperator {
 public:
  explicit HamiltonianOperator(HamiltonianSpec spec);

  const HamiltonianSpec& spec() const { return spec_; }
  std::size_t dimension() const { return dim_; }

  // out = H * in. Pure; safe to call concurrently on distinct outputs.
  void apply(const Vector& in, Vector& out) const;
  Vector apply(const Vector& in) const;

  // Dense realization, refused above kDenseMaxSites.
  Matrix dense() const;

 private:
  HamiltonianSpec spec_;
  std::size_t dim_;
  Vector diagonal_;                        // -h * sum_i sz_i(s)
  std::vector<std::uint64_t> nn_masks_;    // nearest-neighbor flip masks
  std::vector<std::uint64_t> nnn_masks_;   // next-nearest flip masks
};

// Real symmetric observables used by the quench engine.
class Observable {
 public:
  static Observable sigma_z_site(int site, int sites);
  static Observable sigma_z_total(int sites);
  static Observable projector(Vector state);
  static Observable tam_hamiltonian(const HamiltonianSpec& spec);

  std::size_t dimension() const { return dim_; }
  bool is_diagonal() const { return kind_ == Kind::diag; }

  void apply(const Vector& in, Vector& out) const;
  Vector apply(const Vector& in) const;

  // <v|O|v> for normalized v; diagonal observables sum |amplitude|^2 weights.
  double expectation(const Vector& v) const;
  // <u|O|v>; symmetric in u, v.
  double matrix_element(const Vector& u, const Vector& v) const;

 private:
  enum class Kind { diag, projector, hamiltonian };
  Observable() = default;

  Kind kind_ = Kind::diag;
  std::size_t dim_ = 0;
  Vector diag_;                            // Kind::diag
  Vector state_;                           // Kind::projector
  std::shared_ptr<HamiltonianOperator> ham_;  // Kind::hamiltonian
};

// Number of set bits below position cap.
inline int popcount64(std::uint64_t v) { return __builtin_popcountll(v); }

// Relabel sites i -> (i + shift) mod sites on the basis bitstrings.
Vector cyclic_shift(const Vector& v, int sites, int shift = 1);

}  // namespace tamq
