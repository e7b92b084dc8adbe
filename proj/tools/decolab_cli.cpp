// Command-line front end for the decoherence toolkit. Five subcommands:
//
//   beta-curve     analytic contrast/phase vs separation for chosen counts
//   contrast-vs-n  contrast vs mean photon number at fixed separations
//   simulate       Monte Carlo ensemble averages with uncertainties
//   fit            parameter estimation from a measured/synthetic curve file
//   master-eq      density-matrix decoherence snapshots
//
// Exit codes: 0 success, 1 usage or parse error, 2 fit did not converge.
// Identical invocations produce byte-identical output.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "decolab/decolab.hpp"
#include "run_config.hpp"

namespace {

using decolab::format_number;
using decolab::round_to_output_precision;
using decotool::RunConfig;
using decotool::UsageError;
using nlohmann::ordered_json;

void write_text(const RunConfig& cfg, const std::string& text) {
  if (cfg.output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.output_path);
  if (!out) throw UsageError("cannot open output file '" + cfg.output_path + "'");
  out << text;
}

std::string dump_json(const ordered_json& j) { return j.dump(2) + "\n"; }

// One photon-count statistics choice, shared by beta-curve and simulate.
struct PnSpec {
  std::optional<double> poisson;
  std::vector<double> gaussian;  // mean, spread
  bool single_photon = false;
  std::optional<long long> delta;
  bool beam = false;
  std::size_t beam_samples = 200000;
};

void add_pn_options(CLI::App* sub, PnSpec& spec) {
  auto* grp = sub->add_option_group("counts", "photon count statistics (choose one)");
  grp->add_option("--poisson", spec.poisson, "Poisson counts with the given mean");
  grp->add_option("--gaussian", spec.gaussian,
                  "discrete Gaussian counts: mean spread")
      ->expected(2);
  grp->add_flag("--single-photon", spec.single_photon, "exactly one photon per atom");
  grp->add_option("--delta", spec.delta, "exactly N photons per atom");
  grp->add_flag("--beam", spec.beam,
                "sample counts from the configured beam profile");
  grp->require_option(1);
  sub->add_option("--beam-samples", spec.beam_samples,
                  "transit samples drawn for --beam")
      ->check(CLI::PositiveNumber);
}

decolab::PhotonNumberDistribution make_pn(const PnSpec& spec, const RunConfig& cfg) {
  if (spec.poisson) return decolab::poisson_pn(*spec.poisson);
  if (!spec.gaussian.empty())
    return decolab::truncated_gaussian_pn(spec.gaussian[0], spec.gaussian[1]);
  if (spec.single_photon) return decolab::delta_pn(1);
  if (spec.delta) {
    if (*spec.delta < 0) throw UsageError("--delta: count must be non-negative");
    return decolab::delta_pn(static_cast<std::size_t>(*spec.delta));
  }
  return decolab::simulate_pn_beam(cfg.beam(), spec.beam_samples, cfg.seed);
}

// Count mean and spread feeding the Gaussian-limit model. Parametric choices
// report their nominal values; a sampled beam reports realized moments.
std::pair<double, double> pn_counts(const PnSpec& spec, const RunConfig& cfg) {
  if (spec.poisson) return {*spec.poisson, std::sqrt(*spec.poisson)};
  if (!spec.gaussian.empty()) return {spec.gaussian[0], spec.gaussian[1]};
  if (spec.single_photon) return {1.0, 0.0};
  if (spec.delta) return {double(*spec.delta), 0.0};
  const auto pn = make_pn(spec, cfg);
  return {pn.mean(), std::sqrt(pn.variance())};
}

int run_beta_curve(RunConfig cfg, const PnSpec& spec, double dmax, long long points,
                   double noise, std::optional<double> kappa_d_flag,
                   bool gaussian_limit) {
  if (points < 2) throw UsageError("--points: need at least 2");
  if (!(dmax > 0.0)) throw UsageError("--dmax must be positive");
  if (!(noise >= 0.0)) throw UsageError("--noise must be non-negative");
  if (kappa_d_flag && !(*kappa_d_flag > 0.0))
    throw UsageError("--kappa-d must be positive");

  const std::optional<double> kappa_d =
      kappa_d_flag ? kappa_d_flag : cfg.kappa_d_in_k0;
  cfg.kappa_d_in_k0 = kappa_d;
  cfg.format = cfg.format.value_or("csv");

  // A detector width (flag or config) switches to the Gaussian-limit model;
  // without one the exact count-weighted composition is used.
  std::function<std::complex<double>(double)> model;
  if (gaussian_limit || kappa_d) {
    const auto [nb, sn] = pn_counts(spec, cfg);
    const auto par = decolab::DecoherenceParameters::from_counts(
        nb, sn, kappa_d.value_or(std::numeric_limits<double>::infinity()));
    model = [par](double d) { return decolab::beta_total_gaussian_limit(d, par); };
  } else {
    auto pn = make_pn(spec, cfg);
    model = [pn = std::move(pn)](double d) {
      return decolab::beta_total(pn, decolab::beta_single_closed_form(d));
    };
  }

  decolab::SplitMix64 rng(cfg.seed);
  decolab::DecoherenceCurve curve;
  for (long long i = 0; i < points; ++i) {
    const double d = dmax * double(i) / double(points - 1);
    const auto b = model(d);
    double contrast = std::abs(b);
    double phase = std::arg(b);
    if (noise > 0.0) {
      contrast += noise * rng.normal();
      phase += noise * rng.normal();
    }
    const double err = std::max(noise, 1e-6);
    curve.points.push_back({d, contrast, err, phase, err});
  }

  if (*cfg.format == "json") {
    ordered_json j;
    j["config"] = decotool::config_echo(cfg);
    auto& pts = j["points"] = ordered_json::array();
    for (const auto& p : curve.points)
      pts.push_back({{"d_over_lambda", round_to_output_precision(p.d_over_lambda)},
                     {"contrast", round_to_output_precision(p.contrast)},
                     {"contrast_err", round_to_output_precision(p.contrast_err)},
                     {"phase", round_to_output_precision(*p.phase)},
                     {"phase_err", round_to_output_precision(*p.phase_err)}});
    write_text(cfg, dump_json(j));
  } else {
    std::ostringstream os;
    decolab::write_curve_csv(os, curve, {decotool::config_comment_line(cfg)});
    write_text(cfg, os.str());
  }
  return 0;
}

int run_contrast_vs_n(RunConfig cfg, const std::vector<double>& d_list,
                      double nbar_max, long long points,
                      std::optional<double> kappa_d_flag) {
  if (points < 2) throw UsageError("--points: need at least 2");
  if (!(nbar_max > 0.0)) throw UsageError("--nbar-max must be positive");
  if (kappa_d_flag && !(*kappa_d_flag > 0.0))
    throw UsageError("--kappa-d must be positive");
  for (double d : d_list)
    if (!(d >= 0.0)) throw UsageError("--d: separations must be non-negative");

  const std::optional<double> kappa_d =
      kappa_d_flag ? kappa_d_flag : cfg.kappa_d_in_k0;
  cfg.kappa_d_in_k0 = kappa_d;
  cfg.format = cfg.format.value_or("csv");

  // Poisson counts throughout: without a detector window the exact
  // composition, with one the Gaussian-limit width after post-selection.
  auto contrast_at = [&](double d, double nbar) {
    if (kappa_d) {
      const double kp = decolab::kappa_prime(
          decolab::kappa_from_counts(nbar, std::sqrt(nbar)), *kappa_d);
      const double x = decolab::two_pi * d;
      return std::exp(-0.5 * kp * kp * x * x);
    }
    return std::abs(decolab::beta_total(decolab::poisson_pn(nbar),
                                        decolab::beta_single_closed_form(d)));
  };

  struct Row {
    double d, nbar, contrast;
  };
  std::vector<Row> rows;
  for (double d : d_list)
    for (long long i = 0; i < points; ++i) {
      const double nbar = nbar_max * double(i) / double(points - 1);
      rows.push_back({d, nbar, contrast_at(d, nbar)});
    }

  if (*cfg.format == "json") {
    ordered_json j;
    j["config"] = decotool::config_echo(cfg);
    auto& pts = j["points"] = ordered_json::array();
    for (const auto& r : rows)
      pts.push_back({{"d_over_lambda", round_to_output_precision(r.d)},
                     {"n_bar", round_to_output_precision(r.nbar)},
                     {"contrast", round_to_output_precision(r.contrast)}});
    write_text(cfg, dump_json(j));
  } else {
    std::ostringstream os;
    os << "# " << decotool::config_comment_line(cfg) << "\n";
    os << "d_over_lambda,n_bar,contrast\n";
    for (const auto& r : rows)
      os << format_number(r.d) << ',' << format_number(r.nbar) << ','
         << format_number(r.contrast) << "\n";
    write_text(cfg, os.str());
  }
  return 0;
}

int run_simulate(RunConfig cfg, const PnSpec& spec, std::vector<double> d_list,
                 double dmax, long long points, std::optional<double> kappa_d_flag,
                 std::optional<long long> n_atoms_flag) {
  if (n_atoms_flag) {
    if (*n_atoms_flag < 100) throw UsageError("--n-atoms: need at least 100");
    cfg.n_atoms = static_cast<std::size_t>(*n_atoms_flag);
  }
  if (kappa_d_flag && !(*kappa_d_flag > 0.0))
    throw UsageError("--kappa-d must be positive");
  const std::optional<double> kappa_d =
      kappa_d_flag ? kappa_d_flag : cfg.kappa_d_in_k0;
  cfg.kappa_d_in_k0 = kappa_d;
  cfg.format = cfg.format.value_or("json");

  if (d_list.empty()) {
    if (points < 2) throw UsageError("--points: need at least 2");
    if (!(dmax > 0.0)) throw UsageError("--dmax must be positive");
    for (long long i = 0; i < points; ++i)
      d_list.push_back(dmax * double(i) / double(points - 1));
  }
  for (double d : d_list)
    if (!(d >= 0.0)) throw UsageError("--d: separations must be non-negative");

  const auto pn = make_pn(spec, cfg);

  struct Entry {
    double d;
    decolab::EnsembleResult r;
  };
  std::vector<Entry> results;
  results.reserve(d_list.size());
  for (double d : d_list) {
    auto r = kappa_d ? decolab::simulate_with_detector(d, pn, *kappa_d, cfg.n_atoms,
                                                       cfg.seed)
                     : decolab::simulate_phase_diffusion(d, pn, cfg.n_atoms, cfg.seed);
    results.push_back({d, r});
  }

  if (*cfg.format == "csv") {
    std::ostringstream os;
    os << "# " << decotool::config_comment_line(cfg) << "\n";
    os << "d_over_lambda,re,im,abs,stderr,acceptance_fraction,n_atoms,seed\n";
    for (const auto& e : results)
      os << format_number(e.d) << ',' << format_number(e.r.mean_coherence.real())
         << ',' << format_number(e.r.mean_coherence.imag()) << ','
         << format_number(std::abs(e.r.mean_coherence)) << ','
         << format_number(e.r.std_error) << ','
         << format_number(e.r.acceptance_fraction) << ',' << e.r.n_atoms << ','
         << cfg.seed << "\n";
    write_text(cfg, os.str());
  } else {
    ordered_json j;
    j["config"] = decotool::config_echo(cfg);
    auto& arr = j["results"] = ordered_json::array();
    for (const auto& e : results)
      arr.push_back(
          {{"d_over_lambda", round_to_output_precision(e.d)},
           {"re", round_to_output_precision(e.r.mean_coherence.real())},
           {"im", round_to_output_precision(e.r.mean_coherence.imag())},
           {"abs", round_to_output_precision(std::abs(e.r.mean_coherence))},
           {"stderr", round_to_output_precision(e.r.std_error)},
           {"acceptance_fraction", round_to_output_precision(e.r.acceptance_fraction)},
           {"n_atoms", e.r.n_atoms},
           {"seed", cfg.seed}});
    write_text(cfg, dump_json(j));
  }
  return 0;
}

int run_fit(RunConfig cfg, const std::string& data_path, const std::string& model,
            long long max_iterations, bool free_contrast) {
  if (max_iterations < 1) throw UsageError("--max-iterations: need at least 1");
  cfg.format = cfg.format.value_or("json");

  std::ifstream in(data_path);
  if (!in) throw UsageError("cannot open data file '" + data_path + "'");
  const auto curve = decolab::read_curve_csv(in);

  decolab::FitResult fit;
  if (model == "full") {
    decolab::NbarSigmanOptions o;
    o.options.max_iterations = static_cast<unsigned>(max_iterations);
    fit = decolab::fit_nbar_sigman(curve, o);
  } else if (model == "gaussian") {
    decolab::KappaPrimeOptions o;
    o.fit_overall_contrast = free_contrast;
    o.options.max_iterations = static_cast<unsigned>(max_iterations);
    fit = decolab::fit_kappa_prime(curve, o);
  } else {
    fit = decolab::fit_phase_slope(curve);
  }

  const std::size_t k = fit.parameters.size();
  ordered_json j;
  j["config"] = decotool::config_echo(cfg);
  j["model"] = model;
  j["data_file"] = data_path;
  j["n_points"] = curve.points.size();
  for (std::size_t i = 0; i < k; ++i)
    j["parameters"][fit.parameter_names[i]] = round_to_output_precision(fit.parameters[i]);
  for (std::size_t i = 0; i < k; ++i)
    j["standard_errors"][fit.parameter_names[i]] =
        round_to_output_precision(fit.standard_errors[i]);
  auto& cov = j["covariance"] = ordered_json::array();
  for (std::size_t a = 0; a < k; ++a) {
    ordered_json row = ordered_json::array();
    for (std::size_t b = 0; b < k; ++b)
      row.push_back(round_to_output_precision(fit.covariance[a * k + b]));
    cov.push_back(std::move(row));
  }
  j["chi2_per_dof"] = round_to_output_precision(fit.chi2_per_dof);
  j["converged"] = fit.converged;
  j["at_boundary"] = fit.at_boundary;
  j["iterations"] = fit.iterations;
  write_text(cfg, dump_json(j));
  return fit.converged ? 0 : 2;
}

int run_master_eq(RunConfig cfg, double diffusion, double time, long long grid,
                  long long steps, double separation, double width, double xmin,
                  double xmax) {
  if (grid <= 0) throw UsageError("--grid: size must be positive");
  if (steps <= 0) throw UsageError("--steps: need at least 1");
  if (!(time >= 0.0)) throw UsageError("--time must be non-negative");
  if (!(diffusion >= 0.0)) throw UsageError("--diffusion must be non-negative");
  cfg.format = cfg.format.value_or("json");

  const auto rho0 = decolab::DensityMatrixGrid::two_peak(
      static_cast<std::size_t>(grid), xmin, xmax, separation, width);
  const auto analytic = decolab::evolve_pure_decoherence(rho0, diffusion, time);
  const auto stepped = decolab::evolve_pure_decoherence_stepped(
      rho0, diffusion, time, static_cast<std::size_t>(steps));

  const std::size_t m = rho0.size();
  double deviation = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t jx = 0; jx < m; ++jx)
      deviation = std::max(deviation, std::abs(analytic.at(i, jx) - stepped.at(i, jx)));

  auto abs_rows = [m](const decolab::DensityMatrixGrid& g) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < m; ++i) {
      ordered_json row = ordered_json::array();
      for (std::size_t jx = 0; jx < m; ++jx)
        row.push_back(round_to_output_precision(std::abs(g.at(i, jx))));
      rows.push_back(std::move(row));
    }
    return rows;
  };

  if (*cfg.format == "csv") {
    std::ostringstream os;
    os << "# " << decotool::config_comment_line(cfg) << "\n";
    os << "# diffusion: " << format_number(diffusion) << "\n";
    os << "# time: " << format_number(time) << "\n";
    os << "# steps: " << steps << "\n";
    auto emit_matrix = [&](const char* label, const decolab::DensityMatrixGrid& g) {
      os << "# " << label << "\n";
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t jx = 0; jx < m; ++jx)
          os << (jx ? "," : "") << format_number(std::abs(g.at(i, jx)));
        os << "\n";
      }
    };
    os << "# positions\n";
    for (std::size_t i = 0; i < m; ++i)
      os << (i ? "," : "") << format_number(rho0.positions[i]);
    os << "\n";
    emit_matrix("initial_abs", rho0);
    emit_matrix("final_abs", analytic);
    os << "# max_deviation_from_analytic\n"
       << format_number(deviation) << "\n";
    write_text(cfg, os.str());
  } else {
    ordered_json j;
    j["config"] = decotool::config_echo(cfg);
    j["diffusion"] = round_to_output_precision(diffusion);
    j["time"] = round_to_output_precision(time);
    j["steps"] = steps;
    ordered_json pos = ordered_json::array();
    for (std::size_t i = 0; i < m; ++i)
      pos.push_back(round_to_output_precision(rho0.positions[i]));
    j["positions"] = std::move(pos);
    j["initial_abs"] = abs_rows(rho0);
    j["final_abs"] = abs_rows(analytic);
    j["max_deviation_from_analytic"] = round_to_output_precision(deviation);
    write_text(cfg, dump_json(j));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"atom-interferometer photon-decoherence toolkit"};
  app.require_subcommand(1);

  std::string config_path, output_flag, format_flag;
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--config", config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed_flag, "random number generator seed");
  app.add_option("--output", output_flag, "output file (default stdout)");
  app.add_option("--format", format_flag, "output format")
      ->check(CLI::IsMember({"csv", "json"}));

  // beta-curve
  auto* beta = app.add_subcommand(
      "beta-curve", "analytic contrast and phase versus arm separation");
  beta->fallthrough();
  PnSpec beta_pn;
  add_pn_options(beta, beta_pn);
  double beta_dmax = 1.4, beta_noise = 0.0;
  long long beta_points = 100;
  std::optional<double> beta_kappa_d;
  bool beta_gaussian_limit = false;
  beta->add_option("--dmax", beta_dmax, "largest separation, in wavelengths");
  beta->add_option("--points", beta_points, "number of grid points");
  beta->add_option("--noise", beta_noise, "additive Gaussian noise level");
  beta->add_option("--kappa-d", beta_kappa_d,
                   "detector acceptance width in recoil units; implies the "
                   "Gaussian-limit model");
  beta->add_flag("--gaussian-limit", beta_gaussian_limit,
                 "use the Gaussian-limit model even without a detector");

  // contrast-vs-n
  auto* cvn = app.add_subcommand("contrast-vs-n",
                                 "contrast versus mean photon number at fixed "
                                 "separations (Poisson counts)");
  cvn->fallthrough();
  std::vector<double> cvn_d;
  double cvn_nbar_max = 10.0;
  long long cvn_points = 101;
  std::optional<double> cvn_kappa_d;
  cvn->add_option("--d", cvn_d, "separations in wavelengths")->required();
  cvn->add_option("--nbar-max", cvn_nbar_max, "largest mean photon number");
  cvn->add_option("--points", cvn_points, "number of grid points");
  cvn->add_option("--kappa-d", cvn_kappa_d,
                  "detector acceptance width in recoil units");

  // simulate
  auto* sim = app.add_subcommand("simulate",
                                 "Monte Carlo ensemble coherence with uncertainties");
  sim->fallthrough();
  PnSpec sim_pn;
  add_pn_options(sim, sim_pn);
  std::vector<double> sim_d;
  double sim_dmax = 1.4;
  long long sim_points = 15;
  std::optional<double> sim_kappa_d;
  std::optional<long long> sim_n_atoms;
  sim->add_option("--d", sim_d, "explicit separations (overrides --dmax/--points)");
  sim->add_option("--dmax", sim_dmax, "largest separation, in wavelengths");
  sim->add_option("--points", sim_points, "number of grid points");
  sim->add_option("--kappa-d", sim_kappa_d,
                  "detector acceptance width in recoil units");
  sim->add_option("--n-atoms", sim_n_atoms, "atoms per separation");

  // fit
  auto* fit = app.add_subcommand("fit", "fit a curve file and report parameters");
  fit->fallthrough();
  std::string fit_file, fit_model = "full";
  long long fit_max_iter = 200;
  bool fit_free_contrast = false;
  fit->add_option("data_file", fit_file, "curve CSV file")->required();
  fit->add_option("--model", fit_model, "full | gaussian | phase")
      ->check(CLI::IsMember({"full", "gaussian", "phase"}));
  fit->add_option("--max-iterations", fit_max_iter, "optimizer iteration cap");
  fit->add_flag("--free-contrast", fit_free_contrast,
                "gaussian model: also fit the overall contrast");

  // master-eq
  auto* meq = app.add_subcommand("master-eq",
                                 "density-matrix decoherence snapshots");
  meq->fallthrough();
  double meq_diffusion = 0.0, meq_time = 1.0, meq_separation = 0.5,
         meq_width = 0.05, meq_xmin = -1.0, meq_xmax = 1.0;
  long long meq_grid = 64, meq_steps = 1000;
  meq->add_option("--diffusion", meq_diffusion, "momentum-diffusion constant D")
      ->required();
  meq->add_option("--time", meq_time, "evolution time");
  meq->add_option("--grid", meq_grid, "grid points per axis");
  meq->add_option("--steps", meq_steps, "time steps for the stepped evolution");
  meq->add_option("--separation", meq_separation, "two-peak state separation");
  meq->add_option("--width", meq_width, "two-peak state packet width");
  meq->add_option("--xmin", meq_xmin, "grid lower edge");
  meq->add_option("--xmax", meq_xmax, "grid upper edge");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg =
        config_path.empty() ? RunConfig{} : decotool::load_config(config_path);
    if (seed_flag) cfg.seed = *seed_flag;
    if (!output_flag.empty()) cfg.output_path = output_flag;
    if (!format_flag.empty()) cfg.format = format_flag;
    cfg.validate();

    if (beta->parsed())
      return run_beta_curve(cfg, beta_pn, beta_dmax, beta_points, beta_noise,
                            beta_kappa_d, beta_gaussian_limit);
    if (cvn->parsed())
      return run_contrast_vs_n(cfg, cvn_d, cvn_nbar_max, cvn_points, cvn_kappa_d);
    if (sim->parsed())
      return run_simulate(cfg, sim_pn, sim_d, sim_dmax, sim_points, sim_kappa_d,
                          sim_n_atoms);
    if (fit->parsed())
      return run_fit(cfg, fit_file, fit_model, fit_max_iter, fit_free_contrast);
    if (meq->parsed())
      return run_master_eq(cfg, meq_diffusion, meq_time, meq_grid, meq_steps,
                           meq_separation, meq_width, meq_xmin, meq_xmax);
    std::cerr << "error: no subcommand selected\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
