#pragma once

// Run configuration for the command-line tool. A JSON file supplies the
// sections below; anything it does not mention keeps its built-in default,
// and any key it mentions that is not listed here is an error. Command-line
// flags are applied on top by the caller, so the precedence is
// flag > config file > default.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "decolab/curve_io.hpp"
#include "decolab/geometry.hpp"
#include "decolab/photon_statistics.hpp"
#include "decolab/units.hpp"

namespace decotool {

// Natural linewidth of the sodium D2 cycling transition, in 1/us. Together
// with the saturation parameter s this sets the scattering rate at beam
// center, Gamma/2 * s/(1+s).
inline constexpr double kNaLinewidthPerUs = 61.54;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // units
  double lambda_nm = 590.0;
  // geometry
  double diffraction_angle_rad = 2.0e-5;
  double grating_spacing_m = 0.66;
  // beam
  std::string beam_shape = "gaussian";
  double peak_s = 1.0;
  double transit_time_us = 20.0;
  // detector; absent means no acceptance window (infinitely wide detector)
  std::optional<double> kappa_d_in_k0;
  // simulation
  std::size_t n_atoms = 100000;
  std::uint64_t seed = 1;
  // output; unset format lets each command pick its natural one (curves are
  // csv, reports and matrices json); empty path means stdout
  std::optional<std::string> format;
  std::string output_path;

  void validate() const {
    if (!(lambda_nm > 0.0)) throw UsageError("config: units.lambda_nm must be positive");
    if (!(diffraction_angle_rad > 0.0))
      throw UsageError("config: geometry.diffraction_angle_rad must be positive");
    if (!(grating_spacing_m > 0.0))
      throw UsageError("config: geometry.grating_spacing_m must be positive");
    if (beam_shape != "gaussian" && beam_shape != "flat")
      throw UsageError("config: beam.shape must be \"gaussian\" or \"flat\"");
    if (!(peak_s >= 0.0)) throw UsageError("config: beam.peak_s must be non-negative");
    if (!(transit_time_us > 0.0))
      throw UsageError("config: beam.transit_time_us must be positive");
    if (kappa_d_in_k0 && !(*kappa_d_in_k0 > 0.0))
      throw UsageError("config: detector.kappa_d_in_k0 must be positive");
    if (n_atoms < 100) throw UsageError("config: simulation.n_atoms must be at least 100");
    if (format && *format != "csv" && *format != "json")
      throw UsageError("config: output.format must be \"csv\" or \"json\"");
  }

  decolab::UnitsConvention units() const { return decolab::UnitsConvention{lambda_nm}; }

  decolab::InterferometerGeometry geometry() const {
    decolab::InterferometerGeometry g;
    g.diffraction_angle_rad = diffraction_angle_rad;
    g.grating1_z_m = 0.0;
    g.grating2_z_m = grating_spacing_m;
    g.max_separation_m = diffraction_angle_rad * grating_spacing_m;
    return g;
  }

  decolab::BeamProfile beam() const {
    const double peak_rate =
        0.5 * kNaLinewidthPerUs * peak_s / (1.0 + peak_s);
    return beam_shape == "flat"
               ? decolab::BeamProfile::flat(peak_rate, transit_time_us, peak_s)
               : decolab::BeamProfile::gaussian(peak_rate, transit_time_us, peak_s);
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::ordered_json& section,
                                const std::string& prefix,
                                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : section.items()) {
    bool known = false;
    for (const char* a : allowed) known |= key == a;
    if (!known) throw UsageError("config: unknown key '" + prefix + key + "'");
    (void)value;
  }
}

inline double require_number(const nlohmann::ordered_json& v, const std::string& where) {
  if (!v.is_number()) throw UsageError("config: " + where + " must be a number");
  return v.get<double>();
}

inline std::string require_string(const nlohmann::ordered_json& v,
                                  const std::string& where) {
  if (!v.is_string()) throw UsageError("config: " + where + " must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::ordered_json& doc) {
  RunConfig cfg;
  if (!doc.is_object()) throw UsageError("config: top level must be an object");
  detail::reject_unknown_keys(
      doc, "", {"units", "geometry", "beam", "detector", "simulation", "output"});

  if (doc.contains("units")) {
    const auto& u = doc["units"];
    detail::reject_unknown_keys(u, "units.", {"lambda_nm"});
    if (u.contains("lambda_nm"))
      cfg.lambda_nm = detail::require_number(u["lambda_nm"], "units.lambda_nm");
  }
  if (doc.contains("geometry")) {
    const auto& g = doc["geometry"];
    detail::reject_unknown_keys(g, "geometry.",
                                {"diffraction_angle_rad", "grating_spacing_m"});
    if (g.contains("diffraction_angle_rad"))
      cfg.diffraction_angle_rad =
          detail::require_number(g["diffraction_angle_rad"], "geometry.diffraction_angle_rad");
    if (g.contains("grating_spacing_m"))
      cfg.grating_spacing_m =
          detail::require_number(g["grating_spacing_m"], "geometry.grating_spacing_m");
  }
  if (doc.contains("beam")) {
    const auto& b = doc["beam"];
    detail::reject_unknown_keys(b, "beam.", {"shape", "peak_s", "transit_time_us"});
    if (b.contains("shape")) cfg.beam_shape = detail::require_string(b["shape"], "beam.shape");
    if (b.contains("peak_s"))
      cfg.peak_s = detail::require_number(b["peak_s"], "beam.peak_s");
    if (b.contains("transit_time_us"))
      cfg.transit_time_us =
          detail::require_number(b["transit_time_us"], "beam.transit_time_us");
  }
  if (doc.contains("detector")) {
    const auto& d = doc["detector"];
    detail::reject_unknown_keys(d, "detector.", {"kappa_d_in_k0"});
    if (d.contains("kappa_d_in_k0") && !d["kappa_d_in_k0"].is_null())
      cfg.kappa_d_in_k0 =
          detail::require_number(d["kappa_d_in_k0"], "detector.kappa_d_in_k0");
  }
  if (doc.contains("simulation")) {
    const auto& s = doc["simulation"];
    detail::reject_unknown_keys(s, "simulation.", {"n_atoms", "seed"});
    if (s.contains("n_atoms")) {
      if (!s["n_atoms"].is_number_integer() || s["n_atoms"].get<long long>() < 0)
        throw UsageError("config: simulation.n_atoms must be a non-negative integer");
      cfg.n_atoms = s["n_atoms"].get<std::size_t>();
    }
    if (s.contains("seed")) {
      if (!s["seed"].is_number_integer() || s["seed"].get<long long>() < 0)
        throw UsageError("config: simulation.seed must be a non-negative integer");
      cfg.seed = s["seed"].get<std::uint64_t>();
    }
  }
  if (doc.contains("output")) {
    const auto& o = doc["output"];
    detail::reject_unknown_keys(o, "output.", {"format", "path"});
    if (o.contains("format")) cfg.format = detail::require_string(o["format"], "output.format");
    if (o.contains("path")) cfg.output_path = detail::require_string(o["path"], "output.path");
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open '" + path + "'");
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config: " + std::string(e.what()));
  }
  return parse_config(doc);
}

// The effective configuration, echoed into every output for provenance.
inline nlohmann::ordered_json config_echo(const RunConfig& cfg) {
  using decolab::round_to_output_precision;
  nlohmann::ordered_json j;
  j["units"] = {{"lambda_nm", round_to_output_precision(cfg.lambda_nm)}};
  j["geometry"] = {
      {"diffraction_angle_rad", round_to_output_precision(cfg.diffraction_angle_rad)},
      {"grating_spacing_m", round_to_output_precision(cfg.grating_spacing_m)}};
  j["beam"] = {{"shape", cfg.beam_shape},
               {"peak_s", round_to_output_precision(cfg.peak_s)},
               {"transit_time_us", round_to_output_precision(cfg.transit_time_us)}};
  j["detector"]["kappa_d_in_k0"] =
      cfg.kappa_d_in_k0 ? nlohmann::ordered_json(round_to_output_precision(*cfg.kappa_d_in_k0))
                        : nlohmann::ordered_json(nullptr);
  j["simulation"] = {{"n_atoms", cfg.n_atoms}, {"seed", cfg.seed}};
  // the destination path is deliberately not echoed: the same run written to
  // two different files must produce identical bytes
  j["output"] = {{"format", cfg.format.value_or("csv")}};
  return j;
}

inline std::string config_comment_line(const RunConfig& cfg) {
  return "config: " + config_echo(cfg).dump();
}

}  // namespace decotool
