#include "tamq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "tamq/errors.hpp"
#include "tamq/rng.hpp"

namespace tamq {

namespace {

Observable make_observable(const ObservableChoice& choice,
                           const ExperimentConfig& cfg, const Vector& psi0) {
  if (choice.kind == ObservableChoice::Kind::loschmidt_echo) {
    return Observable::projector(psi0);
  }
  return Observable::sigma_z_site(choice.site, cfg.model.sites);
}

}  // namespace

ResultBundle run(const ExperimentConfig& config) {
  config.validate();

  QuenchSpec q;
  q.pre = config.model;
  q.post = config.model;
  q.post.field += config.delta_h;

  ResultBundle bundle;
  bundle.config = config;
  bundle.dense_path = config.model.sites <= kDenseMaxSites;

  QuenchResult res;
  if (bundle.dense_path) {
    res = quench_spectrum_dense(q, config.dense_retain_accuracy);
  } else {
    LanczosConfig lanczos;
    lanczos.max_krylov = config.max_krylov;
    res = quench_spectrum(q, config.sum_rule_accuracy, lanczos);
  }
  bundle.spectrum = res.spectrum;

  for (const auto& choice : config.observables) {
    ObservableResult obs;
    obs.choice = choice;
    if (choice.kind == ObservableChoice::Kind::loschmidt_echo) {
      obs.series = loschmidt_series(res.spectrum);
    } else {
      obs.series = observable_series(
          res.spectrum, res.eig,
          make_observable(choice, config, res.initial_state));
    }
    obs.moments = exact_moments(obs.series);
    obs.distribution =
        sample_signal(obs.series, config.sampling, config.threads);

    if (config.analysis.two_mode && !obs.series.terms.empty()) {
      obs.two_mode = two_mode_fit(obs.series);
      if (std::abs(obs.two_mode->amp_a) > 0.0) {
        obs.two_mode_comparison =
            compare(obs.distribution, make_two_mode_reference(*obs.two_mode));
      }
    }
    if (config.analysis.gaussian && obs.distribution.sample_variance > 0.0) {
      const double mean = obs.distribution.sample_mean;
      const double stddev = std::sqrt(obs.distribution.sample_variance);
      obs.gaussian_fit = {mean, stddev};
      obs.gaussian_comparison =
          compare(obs.distribution, make_gaussian_reference(mean, stddev));
    }
    bundle.observables.push_back(std::move(obs));
  }
  return bundle;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path.string());
  return out;
}

void write_provenance(std::ofstream& out, const ExperimentConfig& cfg) {
  out << "# tamq " << kVersion << "\n";
  out << "# seed " << cfg.sampling.rng_seed << "\n";
  std::istringstream echo(cfg.canonical_text());
  std::string line;
  while (std::getline(echo, line)) {
    out << "# config: " << line << "\n";
  }
}

void check_invariants(const ResultBundle& bundle) {
  const auto& s = bundle.spectrum;
  if (std::abs(s.weights.sum() + s.deficit - 1.0) > 1e-12) {
    throw NumericalError("export_tables: sum rule violated at write time");
  }
  for (const auto& obs : bundle.observables) {
    const auto& d = obs.distribution;
    double mass = 0.0;
    for (std::size_t b = 0; b + 1 < d.bin_edges.size(); ++b) {
      mass += d.densities[b] * (d.bin_edges[b + 1] - d.bin_edges[b]);
    }
    if (std::abs(mass - 1.0) > 1e-9) {
      throw NumericalError(
          "export_tables: histogram normalization violated at write time");
    }
  }
}

}  // namespace

void export_tables(const ResultBundle& bundle,
                   const std::filesystem::path& dir) {
  check_invariants(bundle);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory: " + dir.string());
  }
  const ExperimentConfig& cfg = bundle.config;

  {
    auto out = open_output(dir / "spectrum.tsv");
    write_provenance(out, cfg);
    out << "n\tenergy\toverlap\tweight\n";
    for (Eigen::Index n = 0; n < bundle.spectrum.energies.size(); ++n) {
      out << n << '\t' << format_double(bundle.spectrum.energies[n]) << '\t'
          << format_double(bundle.spectrum.overlaps[n]) << '\t'
          << format_double(bundle.spectrum.weights[n]) << '\n';
    }
    out << "# deficit " << format_double(bundle.spectrum.deficit) << "\n";
    out << "# ground_energy_pre "
        << format_double(bundle.spectrum.ground_energy_pre) << "\n";
  }

  for (const auto& obs : bundle.observables) {
    const std::string base = obs.choice.name();

    {
      auto out = open_output(dir / (base + "_series.tsv"));
      write_provenance(out, cfg);
      out << "omega\tcoeff\n";
      for (const auto& term : obs.series.terms) {
        out << format_double(term.omega) << '\t' << format_double(term.coeff)
            << '\n';
      }
      out << "# mean " << format_double(obs.series.mean) << "\n";
      out << "# exact_variance " << format_double(obs.moments.variance)
          << "\n";
      out << "# deficit " << format_double(obs.series.deficit) << "\n";
    }

    {
      auto out = open_output(dir / (base + "_samples.tsv"));
      write_provenance(out, cfg);
      out << "index\ttime\tvalue\n";
      const auto& d = obs.distribution;
      for (std::size_t i = 0; i < d.samples.size(); ++i) {
        const double t =
            uniform01(d.plan.rng_seed, static_cast<std::uint64_t>(i)) *
            d.plan.horizon;
        out << i << '\t' << format_double(t) << '\t'
            << format_double(d.samples[i]) << '\n';
      }
    }

    {
      auto out = open_output(dir / (base + "_histogram.tsv"));
      write_provenance(out, cfg);
      out << "bin_lo\tbin_hi\tdensity\n";
      const auto& d = obs.distribution;
      for (std::size_t b = 0; b + 1 < d.bin_edges.size(); ++b) {
        out << format_double(d.bin_edges[b]) << '\t'
            << format_double(d.bin_edges[b + 1]) << '\t'
            << format_double(d.densities[b]) << '\n';
      }
      if (d.degenerate) out << "# degenerate 1\n";
    }

    if (obs.two_mode || obs.gaussian_fit) {
      auto out = open_output(dir / (base + "_analytic.tsv"));
      write_provenance(out, cfg);
      out << "f\tdensity\tsingular_flag\n";
      const auto& d = obs.distribution;
      std::vector<double> singular;
      std::function<double(double)> density;
      if (obs.two_mode) {
        const AnalyticReference ref = make_two_mode_reference(*obs.two_mode);
        singular = ref.singular_points;
        density = ref.density;
      } else {
        density = [&obs](double f) {
          return gaussian_reference(obs.gaussian_fit->first,
                                    obs.gaussian_fit->second, f);
        };
      }
      for (std::size_t b = 0; b + 1 < d.bin_edges.size(); ++b) {
        const double lo = d.bin_edges[b];
        const double hi = d.bin_edges[b + 1];
        const double f = 0.5 * (lo + hi);
        const bool sing =
            std::any_of(singular.begin(), singular.end(),
                        [&](double s) { return s >= lo && s < hi; });
        out << format_double(f) << '\t'
            << format_double(sing ? 0.0 : density(f)) << '\t' << (sing ? 1 : 0)
            << '\n';
      }
    }
  }

  {
    auto out = open_output(dir / "summary.txt");
    write_provenance(out, cfg);
    out << "dense_path = " << (bundle.dense_path ? 1 : 0) << "\n";
    out << "retained_states = " << bundle.spectrum.energies.size() << "\n";
    out << "deficit = " << format_double(bundle.spectrum.deficit) << "\n";
    out << "ground_energy_pre = "
        << format_double(bundle.spectrum.ground_energy_pre) << "\n";
    const Eigen::Index k = bundle.spectrum.weights.size();
    for (Eigen::Index n = 0; n < std::min<Eigen::Index>(3, k); ++n) {
      out << "p" << n << " = " << format_double(bundle.spectrum.weights[n])
          << "\n";
    }
    out << "purity = "
        << format_double(bundle.spectrum.weights.array().square().sum())
        << "\n";
    for (const auto& obs : bundle.observables) {
      const std::string base = obs.choice.name();
      out << base << ".mean = " << format_double(obs.moments.mean) << "\n";
      out << base
          << ".variance = " << format_double(obs.moments.variance) << "\n";
      out << base << ".sample_mean = "
          << format_double(obs.distribution.sample_mean) << "\n";
      out << base << ".sample_variance = "
          << format_double(obs.distribution.sample_variance) << "\n";
      out << base << ".sample_skewness = "
          << format_double(obs.distribution.sample_skewness) << "\n";
      out << base << ".sample_excess_kurtosis = "
          << format_double(obs.distribution.sample_excess_kurtosis) << "\n";
      if (obs.two_mode) {
        out << base << ".two_mode.mean = "
            << format_double(obs.two_mode->mean) << "\n";
        out << base << ".two_mode.amp_a = "
            << format_double(obs.two_mode->amp_a) << "\n";
        out << base << ".two_mode.amp_b = "
            << format_double(obs.two_mode->amp_b) << "\n";
        out << base << ".two_mode.omega_a = "
            << format_double(obs.two_mode->omega_a) << "\n";
        out << base << ".two_mode.omega_b = "
            << format_double(obs.two_mode->omega_b) << "\n";
      }
      if (obs.two_mode_comparison) {
        out << base << ".two_mode.ks_distance = "
            << format_double(obs.two_mode_comparison->ks_distance) << "\n";
        out << base << ".two_mode.sup_norm_binned = "
            << format_double(obs.two_mode_comparison->sup_norm_binned) << "\n";
      }
      if (obs.gaussian_fit) {
        out << base << ".gaussian.mean = "
            << format_double(obs.gaussian_fit->first) << "\n";
        out << base << ".gaussian.stddev = "
            << format_double(obs.gaussian_fit->second) << "\n";
      }
      if (obs.gaussian_comparison) {
        out << base << ".gaussian.ks_distance = "
            << format_double(obs.gaussian_comparison->ks_distance) << "\n";
        out << base << ".gaussian.sup_norm_binned = "
            << format_double(obs.gaussian_comparison->sup_norm_binned) << "\n";
      }
    }
  }
}

ScalingBundle run_scaling(const ScalingConfig& config) {
  config.validate();
  ScalingBundle bundle;
  bundle.config = config;

  ProbeOptions opt;
  opt.sum_rule_accuracy = config.sum_rule_accuracy;
  opt.max_krylov = config.max_krylov;

  if (config.probe_weight) {
    bundle.weight = weight_scaling_probe(config.kappa, config.field,
                                         config.delta_h, config.sizes, opt);
  }
  if (config.probe_fidelity) {
    bundle.fidelity = fidelity_scaling_probe(
        config.kappa, config.field, config.delta_h, config.sizes,
        config.regime);
  }
  if (config.probe_matrix_element) {
    bundle.matrix_element = matrix_element_scaling_probe(
        config.kappa, config.field, config.sizes, opt);
  }
  return bundle;
}

void export_scaling_tables(const ScalingBundle& bundle,
                           const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory: " + dir.string());
  }

  auto write_fit = [](std::ofstream& out, const std::string& probe,
                      const ScalingFit& fit) {
    for (const auto& [L, y] : fit.points) {
      out << probe << '\t' << format_double(L) << '\t' << format_double(y)
          << '\t' << format_double(fit.exponent) << '\t'
          << format_double(fit.amplitude) << '\t'
          << format_double(fit.r_squared) << '\n';
    }
  };

  auto out = open_output(dir / "scaling_fits.tsv");
  out << "# tamq " << kVersion << "\n";
  std::istringstream echo(bundle.config.canonical_text());
  std::string line;
  while (std::getline(echo, line)) {
    out << "# config: " << line << "\n";
  }
  out << "probe\tsize\tvalue\texponent\tamplitude\tr_squared\n";
  if (bundle.weight) write_fit(out, "weight_p1", *bundle.weight);
  if (bundle.fidelity) write_fit(out, "neg_log_fidelity", *bundle.fidelity);
  if (bundle.matrix_element) {
    write_fit(out, "matrix_element_intensive", bundle.matrix_element->intensive);
    write_fit(out, "matrix_element_extensive", bundle.matrix_element->extensive);
  }
}

}  // namespace tamq
