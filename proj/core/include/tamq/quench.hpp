#pragma once

#include <vector>

#include "tamq/eigensolver.hpp"
#include "tamq/hamiltonian.hpp"

namespace tamq {

// Pre- and post-quench Hamiltonians. Only transverse-field quenches are
// supported: the specs must differ in h alone. The quench parameter is
// delta_lambda = post.field - pre.field, coupling to V = -sum_i sz_i
// (sign fixed by the global minus in the Hamiltonian).
struct QuenchSpec {
  HamiltonianSpec pre;
  HamiltonianSpec post;

  double delta_h() const { return post.field - pre.field; }
  void validate() const;  // throws ConfigError
};

// Complete reduced description of the quench: energies E_n of the retained
// post-quench eigenstates, real overlaps c_n = <n|psi0>, weights p_n = c_n^2,
// and the sum-rule deficit 1 - sum p_n.
struct QuenchSpectrum {
  Vector energies;
  Vector overlaps;
  Vector weights;
  double deficit = 0.0;
  double ground_energy_pre = 0.0;
};

struct QuenchResult {
  QuenchSpectrum spectrum;
  EigenSystem eig;        // retained eigenpairs, consistent with spectrum
  Vector initial_state;   // |psi0>, ground state of the pre-quench spec
};

// Lanczos protocol: seed the post-quench solver with |psi0> and grow the
// Krylov space until the converged weights satisfy the sum rule to within
// sum_rule_accuracy. Fails with the achieved deficit if max_krylov is hit.
QuenchResult quench_spectrum(const QuenchSpec& q, double sum_rule_accuracy,
                             const LanczosConfig& base = {});

// Dense protocol (L <= kDenseMaxSites): full diagonalization of the
// post-quench Hamiltonian, retaining the largest weights until the deficit
// drops below retain_accuracy.
QuenchResult quench_spectrum_dense(const QuenchSpec& q,
                                   double retain_accuracy = 1e-9);

// Second-order weights from the retained eigensystem of the post-quench
// Hamiltonian:
//   p_0 = 1 - dl^2 sum_{m!=0} |<m|V|0>|^2 / (E_m - E_0)^2
//   p_n =     dl^2 |<0|V|n>|^2 / (E_0 - E_n)^2
// remainder reports how much of <0|V^2|0> - <0|V|0>^2 the retained set misses.
struct PerturbativeWeights {
  std::vector<double> weights;
  double remainder = 0.0;
};
PerturbativeWeights perturbative_weights(const EigenSystem& eig,
                                         const Observable& V,
                                         double delta_lambda);

// Time signal <O(t)> = mean + sum_k coeff_k cos(omega_k t), frequencies
// strictly positive, deduplicated; exactly degenerate pairs fold into mean.
struct ObservableSeries {
  struct Term {
    double omega;
    double coeff;
  };
  double mean = 0.0;
  std::vector<Term> terms;
  double deficit = 0.0;   // sum-rule deficit of the underlying spectrum
};

ObservableSeries observable_series(const QuenchSpectrum& qs,
                                   const EigenSystem& eig,
                                   const Observable& O);

// Loschmidt echo series: mean sum p_n^2, pair terms 2 p_n p_m.
ObservableSeries loschmidt_series(const QuenchSpectrum& qs);

double evaluate(const ObservableSeries& series, double t);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};
// Exact long-time moments: mean and (1/2) sum coeff^2.
Moments exact_moments(const ObservableSeries& series);

// Ground state fidelity |<ground(post)|ground(pre)>|.
double fidelity(const QuenchSpec& q);

}  // namespace tamq
