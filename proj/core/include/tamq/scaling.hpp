#pragma once

#include <utility>
#include <vector>

#include "tamq/quench.hpp"

namespace tamq {

// Exponents of the universality class controlling the quench response.
struct CriticalExponents {
  double dim = 1.0;    // spatial dimension d
  double zeta = 1.0;   // dynamical exponent
  double nu = 1.0;     // correlation-length exponent

  double delta_v() const { return dim + zeta - 1.0 / nu; }
  // Low-energy exponent of the squared matrix element at criticality.
  double alpha() const { return 2.0 * (delta_v() - dim) / zeta; }

  static CriticalExponents ising() { return {1.0, 1.0, 1.0}; }
};

// Least-squares power law y = amplitude * L^exponent, fitted in log-log space.
struct ScalingFit {
  std::vector<std::pair<double, double>> points;  // (size, value)
  double exponent = 0.0;
  double amplitude = 0.0;
  double r_squared = 0.0;
};

ScalingFit power_law_fit(const std::vector<std::pair<double, double>>& points);

// chi / dl^2 = sum_{m != 0} |<m|V|0>|^2 / (E_m - E_0)^2 over retained states.
// remainder reports the missing part of the sum rule
// sum |<m|V|0>|^2 = <0|V^2|0> - <0|V|0>^2.
double fidelity_susceptibility(const EigenSystem& eig, const Observable& V,
                               double* remainder = nullptr);

enum class Regime { regular, critical };

struct ProbeOptions {
  double sum_rule_accuracy = 1e-3;
  int max_krylov = 400;
  double residual_tol = 1e-10;
};

// p_1 vs L at the critical line; Ising expectation: exponent 2/nu = 2.
ScalingFit weight_scaling_probe(double kappa, double h_c, double dh,
                                const std::vector<int>& sizes,
                                const ProbeOptions& opt = {});

// -ln F vs L; regular points scale as L^d, critical as L^{2/nu}.
ScalingFit fidelity_scaling_probe(double kappa, double h1, double dh,
                                  const std::vector<int>& sizes,
                                  Regime regime);

// |<0|sz_site|1>| and |<0|sum sz|1>| vs L at the critical line; Ising
// expectation: exponents -Delta_V = -1 (intensive) and 0 (extensive).
struct MatrixElementScaling {
  ScalingFit intensive;
  ScalingFit extensive;
};
MatrixElementScaling matrix_element_scaling_probe(
    double kappa, double h_c, const std::vector<int>& sizes,
    const ProbeOptions& opt = {});

}  // namespace tamq
