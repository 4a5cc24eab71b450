#pragma once

// Text and binary formats: design file, coefficient file, Bode CSV, and raw
// little-endian float64 sample streams. Numbers are written with
// std::to_chars, so output never depends on the C locale.

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "spectral_tilt/analog_design.hpp"
#include "spectral_tilt/bode_analysis.hpp"
#include "spectral_tilt/digitize.hpp"
#include "spectral_tilt/error.hpp"

namespace spectral_tilt::io {

/// Shortest text that round-trips at 17 significant digits.
inline std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string format_real_list(std::span<const double> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != 0) out += ", ";
    out += format_real(values[i]);
  }
  out += "]";
  return out;
}

// ---------------------------------------------------------------------------
// Design file
// ---------------------------------------------------------------------------

inline void write_design(std::ostream& os, const Design& d) {
  os << "{\n"
     << "  \"alpha\": " << format_real(d.spec.alpha()) << ",\n"
     << "  \"integer_part\": " << d.spec.integer_part() << ",\n"
     << "  \"n\": " << d.order << ",\n"
     << "  \"k_skip\": " << d.k_skip << ",\n"
     << "  \"f_min_hz\": " << format_real(d.band.f_min_hz()) << ",\n"
     << "  \"f_max_hz\": " << format_real(d.band.f_max_hz()) << ",\n"
     << "  \"f1_hz\": " << format_real(d.placement.f1_hz) << ",\n"
     << "  \"r\": " << format_real(d.placement.ratio) << ",\n"
     << "  \"poles_rad_s\": " << format_real_list(d.filter.poles) << ",\n"
     << "  \"zeros_rad_s\": " << format_real_list(d.filter.zeros) << ",\n"
     << "  \"gain\": " << format_real(d.filter.gain) << "\n"
     << "}\n";
}

namespace detail {

inline nlohmann::json parse_json(std::istream& is, const char* what) {
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_file, std::string(what) + ": " + e.what());
  }
}

template <typename T>
T field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(Errc::malformed_file, std::string("missing field \"") + key + "\"");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::malformed_file, std::string("field \"") + key + "\" has the wrong type");
  }
}

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace detail

/// Reads a design file. The placement is re-solved from (n, k_skip, band)
/// and checked against the stored f1 and r; the filter itself is taken
/// verbatim from the file.
inline Design read_design(std::istream& is) {
  const nlohmann::json j = detail::parse_json(is, "design file");
  using detail::field;
  try {
    Design d{SlopeSpec(field<double>(j, "alpha"), field<int>(j, "integer_part")),
             field<int>(j, "n"),
             field<int>(j, "k_skip"),
             BandSpec(field<double>(j, "f_min_hz"), field<double>(j, "f_max_hz")),
             {},
             {}};
    d.placement = place_poles(d.order, d.k_skip, d.band);
    if (!detail::close_rel(d.placement.f1_hz, field<double>(j, "f1_hz"), 1e-12) ||
        !detail::close_rel(d.placement.ratio, field<double>(j, "r"), 1e-12)) {
      throw Error(Errc::malformed_file, "f1_hz / r inconsistent with n, k_skip and band");
    }
    d.filter.poles = field<std::vector<double>>(j, "poles_rad_s");
    d.filter.zeros = field<std::vector<double>>(j, "zeros_rad_s");
    d.filter.gain = field<double>(j, "gain");
    const auto expected_poles = static_cast<std::size_t>(d.order + std::max(0, -d.spec.integer_part()));
    const auto expected_zeros = static_cast<std::size_t>(d.order + std::max(0, d.spec.integer_part()));
    if (d.filter.poles.size() != expected_poles || d.filter.zeros.size() != expected_zeros) {
      throw Error(Errc::malformed_file, "pole/zero counts do not match n and integer_part");
    }
    for (double v : d.filter.poles) {
      if (!(v < 0.0)) throw Error(Errc::malformed_file, "poles must be negative real");
    }
    for (double v : d.filter.zeros) {
      if (!(v < 0.0)) throw Error(Errc::malformed_file, "zeros must be negative real");
    }
    if (!(d.filter.gain > 0.0)) throw Error(Errc::malformed_file, "gain must be positive");
    return d;
  } catch (const Error& e) {
    if (e.code() == Errc::malformed_file) throw;
    throw Error(Errc::malformed_file, e.what());
  }
}

// ---------------------------------------------------------------------------
// Coefficient file
// ---------------------------------------------------------------------------

inline void write_coefficients(std::ostream& os, const DigitalFilter& f) {
  os << "{\n"
     << "  \"sample_rate_hz\": " << format_real(f.sample_rate_hz) << ",\n"
     << "  \"gain\": " << format_real(f.gain) << ",\n"
     << "  \"sections\": [";
  for (std::size_t i = 0; i < f.sections.size(); ++i) {
    const Section& s = f.sections[i];
    os << (i == 0 ? "\n" : ",\n") << "    {\"b0\": " << format_real(s.b0)
       << ", \"b1\": " << format_real(s.b1) << ", \"a1\": " << format_real(s.a1) << "}";
  }
  os << (f.sections.empty() ? "]\n" : "\n  ]\n") << "}\n";
}

inline DigitalFilter read_coefficients(std::istream& is) {
  const nlohmann::json j = detail::parse_json(is, "coefficient file");
  using detail::field;
  DigitalFilter f;
  f.sample_rate_hz = field<double>(j, "sample_rate_hz");
  f.gain = field<double>(j, "gain");
  if (!(f.sample_rate_hz > 0.0)) throw Error(Errc::malformed_file, "sample rate must be positive");
  if (!std::isfinite(f.gain)) throw Error(Errc::malformed_file, "gain must be finite");
  const auto sections = field<nlohmann::json>(j, "sections");
  if (!sections.is_array()) throw Error(Errc::malformed_file, "\"sections\" must be an array");
  for (const auto& s : sections) {
    Section sec{field<double>(s, "b0"), field<double>(s, "b1"), field<double>(s, "a1")};
    if (!(std::abs(sec.a1) < 1.0)) throw Error(Errc::malformed_file, "unstable section");
    f.sections.push_back(sec);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Bode CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kBodeHeader =
    "omega_rad_s,omega_ln,mag_db,phase_rad,slope_nepers,slope_error";

/// One row per grid point of `report`, preceded by `#` metadata lines.
inline void write_bode_csv(std::ostream& os, const Design& d, const SlopeReport& report) {
  os << "# alpha=" << format_real(d.spec.alpha()) << "\n"
     << "# integer_part=" << d.spec.integer_part() << "\n"
     << "# n=" << d.order << "\n"
     << "# k_skip=" << d.k_skip << "\n"
     << "# f1_hz=" << format_real(d.placement.f1_hz) << "\n"
     << "# r=" << format_real(d.placement.ratio) << "\n"
     << "# good_band_ln=" << format_real(report.good_band.first) << ","
     << format_real(report.good_band.second) << "\n"
     << "# max_abs_slope_error=" << format_real(report.max_abs_error_in_band) << "\n"
     << kBodeHeader << "\n";
  constexpr double kDbPerNeper = 20.0 / 2.302585092994045684;  // 20 / ln 10
  for (std::size_t i = 0; i < report.grid.omega_log.size(); ++i) {
    const double x = report.grid.omega_log[i];
    const double omega = std::exp(x);
    const LogResponse lr = log_response(d.filter, omega);
    os << format_real(omega) << ',' << format_real(x) << ',' << format_real(kDbPerNeper * lr.log_mag)
       << ',' << format_real(lr.phase) << ',' << format_real(report.slope[i]) << ','
       << format_real(report.error[i]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Raw float64 little-endian samples
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t to_little(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(bits);
  return bits;
}

}  // namespace detail

/// Reads up to `max_samples`; returns fewer only at end of stream. A trailing
/// partial sample is an error.
inline std::vector<double> read_samples(std::istream& is, std::size_t max_samples) {
  std::vector<double> out;
  out.reserve(max_samples);
  std::vector<char> raw(max_samples * sizeof(double));
  is.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  const auto got = static_cast<std::size_t>(is.gcount());
  if (got % sizeof(double) != 0) throw Error(Errc::invalid_input, "truncated float64 sample");
  for (std::size_t i = 0; i < got / sizeof(double); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, raw.data() + i * sizeof(double), sizeof bits);
    out.push_back(std::bit_cast<double>(detail::to_little(bits)));
  }
  return out;
}

inline void write_samples(std::ostream& os, std::span<const double> samples) {
  for (double v : samples) {
    const std::uint64_t bits = detail::to_little(std::bit_cast<std::uint64_t>(v));
    char raw[sizeof bits];
    std::memcpy(raw, &bits, sizeof bits);
    os.write(raw, sizeof raw);
  }
}

}  // namespace spectral_tilt::io
