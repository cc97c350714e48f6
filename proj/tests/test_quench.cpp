#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <map>

#include "oracle.hpp"
#include "tamq/errors.hpp"
#include "tamq/quench.hpp"

using tamq::Matrix;
using tamq::Observable;
using tamq::QuenchSpec;
using tamq::QuenchSpectrum;
using tamq::Vector;

namespace {

QuenchSpec fig2_like(int L) {
  return {{L, 0.3, 1.4}, {L, 0.3, 1.44}};
}

// Handcrafted spectrum with given weights; unit overlaps signs positive.
QuenchSpectrum toy_spectrum(std::initializer_list<double> energies,
                            std::initializer_list<double> weights) {
  QuenchSpectrum qs;
  qs.energies = Eigen::Map<const Vector>(std::data(energies),
                                         static_cast<Eigen::Index>(
                                             energies.size()));
  qs.weights = Eigen::Map<const Vector>(std::data(weights),
                                        static_cast<Eigen::Index>(
                                            weights.size()));
  qs.overlaps = qs.weights.cwiseSqrt();
  qs.deficit = 1.0 - qs.weights.sum();
  return qs;
}

}  // namespace

TEST_CASE("quench spec validation") {
  CHECK_NOTHROW(fig2_like(8).validate());
  QuenchSpec bad_kappa{{8, 0.3, 1.4}, {8, 0.4, 1.44}};
  CHECK_THROWS_AS(bad_kappa.validate(), tamq::ConfigError);
  QuenchSpec bad_size{{8, 0.3, 1.4}, {10, 0.3, 1.44}};
  CHECK_THROWS_AS(bad_size.validate(), tamq::ConfigError);
  CHECK(fig2_like(8).delta_h() == doctest::Approx(0.04));
}

TEST_CASE("dense quench spectrum: sum rule and overlap definition, L=8") {
  const auto q = fig2_like(8);
  const auto res = tamq::quench_spectrum_dense(q, 1e-9);
  const auto& qs = res.spectrum;

  CHECK(qs.deficit >= 0.0);
  CHECK(qs.deficit <= 1e-9);
  CHECK(qs.weights.sum() + qs.deficit == doctest::Approx(1.0).epsilon(1e-12));

  // Overlaps really are <n|psi0> for the retained eigenpairs.
  for (Eigen::Index n = 0; n < qs.energies.size(); ++n) {
    const double c = res.eig.vectors.col(n).dot(res.initial_state);
    CHECK(qs.overlaps[n] == doctest::Approx(c).epsilon(1e-12));
    CHECK(qs.weights[n] == doctest::Approx(c * c).epsilon(1e-12));
  }
  // Energies ascending.
  for (Eigen::Index n = 1; n < qs.energies.size(); ++n) {
    CHECK(qs.energies[n] >= qs.energies[n - 1]);
  }
  // psi0 is the pre-quench ground state.
  tamq::HamiltonianOperator Hpre(q.pre);
  CHECK((Hpre.apply(res.initial_state) -
         qs.ground_energy_pre * res.initial_state)
            .norm() < 1e-9);
}

TEST_CASE("Lanczos quench spectrum matches dense weights, L=8") {
  const auto q = fig2_like(8);
  const auto dense = tamq::quench_spectrum_dense(q, 1e-12);
  const auto lz = tamq::quench_spectrum(q, 1e-8);

  CHECK(lz.spectrum.deficit <= 1e-8);
  CHECK(lz.spectrum.weights.sum() + lz.spectrum.deficit ==
        doctest::Approx(1.0).epsilon(1e-10));

  // Every dense weight above 1e-6 must appear at the same energy.
  std::map<double, double> dense_by_energy;
  for (Eigen::Index n = 0; n < dense.spectrum.energies.size(); ++n) {
    if (dense.spectrum.weights[n] > 1e-6) {
      dense_by_energy[dense.spectrum.energies[n]] = dense.spectrum.weights[n];
    }
  }
  for (const auto& [energy, weight] : dense_by_energy) {
    double found = 0.0;
    for (Eigen::Index n = 0; n < lz.spectrum.energies.size(); ++n) {
      if (std::abs(lz.spectrum.energies[n] - energy) < 1e-7) {
        found += lz.spectrum.weights[n];
      }
    }
    CHECK(found == doctest::Approx(weight).epsilon(1e-6));
  }
}

TEST_CASE("Lanczos quench spectrum respects the accuracy knob, L=12") {
  const auto res = tamq::quench_spectrum(fig2_like(12), 1e-6);
  CHECK(res.spectrum.deficit <= 1e-6);
  // Retained pairs are genuine eigenpairs of the post Hamiltonian.
  tamq::HamiltonianOperator Hpost({12, 0.3, 1.44});
  for (const Eigen::Index n :
       {Eigen::Index{0}, res.spectrum.energies.size() - 1}) {
    const Vector v = res.eig.vectors.col(n);
    CHECK((Hpost.apply(v) - res.spectrum.energies[n] * v).norm() < 1e-7);
  }
}

TEST_CASE("perturbative weights: two-level closed form") {
  // Levels at E = {0, 2}; V projects onto (|0> + |1>)/sqrt(2), so
  // |<1|V|0>| = 1/2 and p_1 = dl^2 / 16 exactly at second order.
  tamq::EigenSystem eig;
  eig.energies = Vector(2);
  eig.energies << 0.0, 2.0;
  eig.vectors = Matrix::Identity(2, 2);
  eig.residuals = Vector::Zero(2);

  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto V = Observable::projector(plus);

  const double dl = 0.1;
  const auto pw = tamq::perturbative_weights(eig, V, dl);
  REQUIRE(pw.weights.size() == 2);
  CHECK(pw.weights[1] == doctest::Approx(dl * dl / 16.0).epsilon(1e-12));
  CHECK(pw.weights[0] ==
        doctest::Approx(1.0 - dl * dl / 16.0).epsilon(1e-12));
  CHECK(pw.remainder == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("perturbative weights approach exact weights as dh^3, L=8") {
  auto exact_vs_pert = [](double dh) {
    QuenchSpec q{{8, 0.3, 1.4}, {8, 0.3, 1.4 + dh}};
    const auto res = tamq::quench_spectrum_dense(q, 1e-12);
    const auto V = Observable::sigma_z_total(8);
    // V couples through -h sum sz; dl = -dh with V = sum sz, or equivalently
    // dl = dh with V = -sum sz. Weights are quadratic in dl so either works.
    const auto pw = tamq::perturbative_weights(res.eig, V, dh);
    double err = std::abs(pw.weights[0] - res.spectrum.weights[0]);
    for (std::size_t n = 1; n < pw.weights.size(); ++n) {
      err = std::max(err,
                     std::abs(pw.weights[n] - res.spectrum.weights[n]));
    }
    return err;
  };
  const double e4 = exact_vs_pert(0.04);
  const double e2 = exact_vs_pert(0.02);
  CHECK(e4 < 1e-4);
  // Third-order error: halving dh divides the discrepancy by about 8.
  CHECK(e4 / e2 > 5.0);
  CHECK(e4 / e2 < 12.0);
}

TEST_CASE("observable series reproduces the direct spectral sum, L=6") {
  const auto q = fig2_like(6);
  const auto res = tamq::quench_spectrum_dense(q, 1e-12);
  const auto O = Observable::sigma_z_site(0, 6);
  const auto series = tamq::observable_series(res.spectrum, res.eig, O);

  // Direct evaluation from the retained eigensystem.
  auto direct = [&](double t) {
    double val = 0.0;
    const auto& qs = res.spectrum;
    for (Eigen::Index n = 0; n < qs.energies.size(); ++n) {
      for (Eigen::Index m = 0; m < qs.energies.size(); ++m) {
        const double M = O.matrix_element(res.eig.vectors.col(n),
                                          res.eig.vectors.col(m));
        val += qs.overlaps[n] * qs.overlaps[m] * M *
               std::cos((qs.energies[n] - qs.energies[m]) * t);
      }
    }
    return val;
  };
  for (const double t : {0.0, 0.37, 2.9, 17.3}) {
    CHECK(tamq::evaluate(series, t) ==
          doctest::Approx(direct(t)).epsilon(1e-9));
  }
  // t = 0 sanity: <psi0|O|psi0> up to the retained deficit.
  const double o0 = O.expectation(res.initial_state);
  CHECK(tamq::evaluate(series, 0.0) == doctest::Approx(o0).epsilon(1e-8));
  for (const auto& term : series.terms) CHECK(term.omega > 0.0);
}

TEST_CASE("loschmidt series: two- and three-level closed forms") {
  {
    const auto qs = toy_spectrum({0.0, 1.3}, {0.6, 0.4});
    const auto s = tamq::loschmidt_series(qs);
    CHECK(s.mean == doctest::Approx(0.52).epsilon(1e-14));
    REQUIRE(s.terms.size() == 1);
    CHECK(s.terms[0].omega == doctest::Approx(1.3).epsilon(1e-14));
    CHECK(s.terms[0].coeff == doctest::Approx(0.48).epsilon(1e-14));
    CHECK(tamq::evaluate(s, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    const auto mom = tamq::exact_moments(s);
    CHECK(mom.mean == doctest::Approx(0.52));
    CHECK(mom.variance == doctest::Approx(0.5 * 0.48 * 0.48).epsilon(1e-14));
  }
  {
    const auto qs = toy_spectrum({0.0, 1.0, 2.5}, {0.7, 0.2, 0.1});
    const auto s = tamq::loschmidt_series(qs);
    CHECK(s.mean == doctest::Approx(0.54).epsilon(1e-14));
    REQUIRE(s.terms.size() == 3);
    double total = 0.0;
    for (const auto& term : s.terms) total += term.coeff;
    CHECK(total == doctest::Approx(2.0 * (0.14 + 0.07 + 0.02)).epsilon(1e-14));
    CHECK(tamq::evaluate(s, 0.0) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("degenerate frequencies are merged") {
  // Equally spaced levels: the (0,1) and (1,2) echo terms share omega = 1.
  const auto qs = toy_spectrum({0.0, 1.0, 2.0}, {0.5, 0.3, 0.2});
  const auto s = tamq::loschmidt_series(qs);
  REQUIRE(s.terms.size() == 2);
  CHECK(s.terms[0].omega == doctest::Approx(1.0));
  CHECK(s.terms[0].coeff ==
        doctest::Approx(2.0 * (0.5 * 0.3 + 0.3 * 0.2)).epsilon(1e-13));
  CHECK(s.terms[1].omega == doctest::Approx(2.0));
  CHECK(s.terms[1].coeff == doctest::Approx(2.0 * 0.5 * 0.2).epsilon(1e-13));
}

TEST_CASE("long-time average of the series equals the mean") {
  const auto q = fig2_like(6);
  const auto res = tamq::quench_spectrum_dense(q, 1e-12);
  const auto s = tamq::loschmidt_series(res.spectrum);
  double avg = 0.0;
  const int n = 200000;
  const double T = 50000.0;
  for (int i = 0; i < n; ++i) {
    avg += tamq::evaluate(s, T * (i + 0.5) / n);
  }
  avg /= n;
  CHECK(avg == doctest::Approx(s.mean).epsilon(2e-3));
}

TEST_CASE("loschmidt moments match the weight sums, L=8") {
  const auto res = tamq::quench_spectrum_dense(fig2_like(8), 1e-12);
  const auto s = tamq::loschmidt_series(res.spectrum);
  const auto mom = tamq::exact_moments(s);
  const auto& p = res.spectrum.weights;
  double p2 = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) p2 += p[i] * p[i];
  CHECK(mom.mean == doctest::Approx(p2).epsilon(1e-10));
}

TEST_CASE("fidelity against direct ground-state overlap, L=6") {
  const auto q = fig2_like(6);
  tamq::HamiltonianOperator Hpre(q.pre), Hpost(q.post);
  const auto pre = tamq::dense_spectrum(Hpre);
  const auto post = tamq::dense_spectrum(Hpost);
  const double direct =
      std::abs(pre.vectors.col(0).dot(post.vectors.col(0)));
  CHECK(tamq::fidelity(q) == doctest::Approx(direct).epsilon(1e-10));
  CHECK(tamq::fidelity(q) <= 1.0);
  CHECK(tamq::fidelity(q) > 0.9);  // small quench
}
