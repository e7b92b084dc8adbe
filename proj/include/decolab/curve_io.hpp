#pragma once

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "decolab/curve.hpp"

namespace decolab {

// All numeric text output goes through one formatter: 9 significant digits,
// trailing zeros stripped, so identical runs produce identical bytes.
inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Round a value to what format_number would print, for sinks (like JSON
// writers) that format numbers themselves.
inline double round_to_output_precision(double v) {
  return std::strtod(format_number(v).c_str(), nullptr);
}

struct CurveParseError : std::runtime_error {
  std::vector<std::size_t> line_numbers;
  explicit CurveParseError(const std::string& msg, std::vector<std::size_t> lines = {})
      : std::runtime_error(msg), line_numbers(std::move(lines)) {}
};

namespace detail {

inline std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(strip(line.substr(start)));
      return out;
    }
    out.push_back(strip(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace detail

inline constexpr const char* curve_header_contrast = "d_over_lambda,contrast,contrast_err";
inline constexpr const char* curve_header_phase =
    "d_over_lambda,contrast,contrast_err,phase,phase_err";

// CSV reader for curve files: '#' lines are comments, the first non-comment
// line must be one of the two canonical headers, every later line one data
// row. Malformed rows are collected and reported together, with 1-based line
// numbers, so one pass shows every problem in the file.
inline DecoherenceCurve read_curve_csv(std::istream& in) {
  DecoherenceCurve curve;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool with_phase = false;
  std::vector<std::size_t> bad_lines;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = detail::strip(line);
    if (body.empty() || body[0] == '#') continue;
    if (!header_seen) {
      if (body == curve_header_contrast) {
        with_phase = false;
      } else if (body == curve_header_phase) {
        with_phase = true;
      } else {
        throw CurveParseError("curve file: unrecognized header '" + body + "'",
                              {line_no});
      }
      header_seen = true;
      continue;
    }
    const auto fields = detail::split_csv(body);
    const std::size_t want = with_phase ? 5 : 3;
    if (fields.size() != want) {
      bad_lines.push_back(line_no);
      continue;
    }
    CurvePoint p;
    double phase = 0, phase_err = 0;
    bool ok = detail::parse_double(fields[0], p.d_over_lambda) &&
              detail::parse_double(fields[1], p.contrast) &&
              detail::parse_double(fields[2], p.contrast_err);
    if (ok && with_phase) {
      ok = detail::parse_double(fields[3], phase) &&
           detail::parse_double(fields[4], phase_err);
      if (ok) {
        p.phase = phase;
        p.phase_err = phase_err;
      }
    }
    if (!ok) {
      bad_lines.push_back(line_no);
      continue;
    }
    curve.points.push_back(p);
  }

  if (!bad_lines.empty()) {
    std::string msg = "curve file: malformed data row(s) at line";
    msg += bad_lines.size() > 1 ? "s " : " ";
    for (std::size_t i = 0; i < bad_lines.size(); ++i) {
      if (i) msg += ", ";
      msg += std::to_string(bad_lines[i]);
    }
    throw CurveParseError(msg, bad_lines);
  }
  if (!header_seen) throw CurveParseError("curve file: empty (no header found)");
  if (curve.points.empty()) throw CurveParseError("curve file: no data rows");
  return curve;
}

// Writer counterpart. comment_lines go first, each prefixed "# "; the phase
// columns are emitted only if every point carries phase data.
inline void write_curve_csv(std::ostream& out, const DecoherenceCurve& curve,
                            const std::vector<std::string>& comment_lines = {}) {
  bool with_phase = !curve.points.empty();
  for (const auto& p : curve.points) with_phase &= p.phase.has_value();

  for (const auto& c : comment_lines) out << "# " << c << "\n";
  out << (with_phase ? curve_header_phase : curve_header_contrast) << "\n";
  for (const auto& p : curve.points) {
    out << format_number(p.d_over_lambda) << ',' << format_number(p.contrast) << ','
        << format_number(p.contrast_err);
    if (with_phase)
      out << ',' << format_number(*p.phase) << ','
          << format_number(p.phase_err.value_or(0.0));
    out << "\n";
  }
}

}  // namespace decolab
