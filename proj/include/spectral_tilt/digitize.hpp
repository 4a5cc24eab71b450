#pragma once

// Bilinear-transform digitization with per-break prewarping, so the digital
// pole and zero frequencies land exactly on the analog geometric layout.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "spectral_tilt/analog_design.hpp"
#include "spectral_tilt/bode_analysis.hpp"
#include "spectral_tilt/error.hpp"

namespace spectral_tilt {

/// Sample rate and bilinear constant c for s = c (1 - z^-1) / (1 + z^-1).
struct DigitizationParams {
  double sample_rate_hz = 0.0;
  double period_s = 0.0;
  double c = 0.0;
};

/// c = 2 pi f1 / tan(pi f1 / fs): maps analog f1 onto digital f1 exactly.
inline double prewarp_constant(double f1_hz, double fs_hz) {
  if (!(fs_hz > 0.0) || !(f1_hz > 0.0)) throw Error(Errc::invalid_input, "need f1 > 0 and fs > 0");
  if (!(f1_hz < fs_hz / 2.0)) throw Error(Errc::above_nyquist, "f1 must be below fs/2");
  return kTwoPi * f1_hz / std::tan(std::numbers::pi * f1_hz / fs_hz);
}

inline DigitizationParams make_digitization_params(double f1_hz, double fs_hz) {
  return {fs_hz, 1.0 / fs_hz, prewarp_constant(f1_hz, fs_hz)};
}

/// Analog break frequency that the bilinear transform (with c bound to f1)
/// sends to digital frequency f_k: f1 tan(pi f_k / fs) / tan(pi f1 / fs).
inline double prewarp_break(double fk_hz, double f1_hz, double fs_hz) {
  if (!(fk_hz > 0.0)) throw Error(Errc::invalid_input, "break frequency must be positive");
  if (!(fk_hz < fs_hz / 2.0)) throw Error(Errc::above_nyquist, "break at or above fs/2");
  if (fk_hz == f1_hz) return f1_hz;
  const double scale = std::numbers::pi / fs_hz;
  return f1_hz * std::tan(scale * fk_hz) / std::tan(scale * f1_hz);
}

/// Number of leading breaks to keep: N such that break[N] <= fs/2 < break[N+1]
/// (0-based), which leaves one full pole interval below Nyquist for the last
/// zero to slide through. If every break is below fs/2 all are kept; if only
/// the first is, it is kept alone.
inline std::size_t truncate_to_nyquist(std::span<const double> breaks_hz, double fs_hz) {
  const double nyquist = fs_hz / 2.0;
  for (std::size_t k = 1; k < breaks_hz.size(); ++k) {
    if (!(breaks_hz[k] > breaks_hz[k - 1])) {
      throw Error(Errc::invalid_input, "breaks must be strictly increasing");
    }
  }
  const auto within = static_cast<std::size_t>(
      std::upper_bound(breaks_hz.begin(), breaks_hz.end(), nyquist) - breaks_hz.begin());
  if (within == 0) throw Error(Errc::empty_design, "no break frequency at or below fs/2");
  if (within == breaks_hz.size() && breaks_hz.back() < nyquist) return within;
  if (within == 1) {
    if (breaks_hz.front() < nyquist) return 1;
    throw Error(Errc::empty_design, "only break sits exactly at fs/2");
  }
  return within - 1;
}

/// (b0 + b1 z^-1) / (1 + a1 z^-1)
struct Section {
  double b0 = 1.0;
  double b1 = 0.0;
  double a1 = 0.0;
};

struct DigitalFilter {
  std::vector<Section> sections;
  double gain = 1.0;
  double sample_rate_hz = 0.0;
};

/// z = (1 + s/c) / (1 - s/c)
inline double bilinear_root(double s_root, double c) { return (1.0 + s_root / c) / (1.0 - s_root / c); }

/// H_d(z) = H_a(c (1 - z^-1) / (1 + z^-1)), exactly.
///
/// Pole k pairs with zero k in increasing break order. Each section is the
/// exact image of (s - z_k) / (s - p_k); a pole without a partner zero gets
/// the image of 1 / (s - p_k), i.e. a zero at z = -1.
inline DigitalFilter bilinear(const AnalogFilter& filter, const DigitizationParams& params) {
  const double c = params.c;
  if (!(c > 0.0)) throw Error(Errc::invalid_input, "bilinear constant must be positive");
  if (filter.zeros.size() > filter.poles.size()) {
    throw Error(Errc::unstable_map, "more zeros than poles maps a pole to z = -1");
  }
  DigitalFilter out;
  out.gain = filter.gain;
  out.sample_rate_hz = params.sample_rate_hz;
  out.sections.reserve(filter.poles.size());
  for (std::size_t k = 0; k < filter.poles.size(); ++k) {
    const double p = filter.poles[k];
    const double den = c - p;
    Section s;
    s.a1 = -(c + p) / den;
    if (k < filter.zeros.size()) {
      const double z = filter.zeros[k];
      s.b0 = (c - z) / den;
      s.b1 = -(c + z) / den;
    } else {
      s.b0 = 1.0 / den;
      s.b1 = 1.0 / den;
    }
    if (!(std::abs(s.a1) < 1.0)) {
      throw Error(Errc::unstable_map, "digital pole on or outside the unit circle");
    }
    out.sections.push_back(s);
  }
  return out;
}

/// H_d(e^{j omega T}) for omega in rad/s.
inline std::complex<double> digital_response(const DigitalFilter& filter, double omega_rad_s) {
  const std::complex<double> zinv = std::polar(1.0, -omega_rad_s / filter.sample_rate_hz);
  std::complex<double> h(filter.gain, 0.0);
  for (const Section& s : filter.sections) {
    h *= (s.b0 + s.b1 * zinv) / (1.0 + s.a1 * zinv);
  }
  return h;
}

/// Digital filter plus the bookkeeping needed to re-slide its zeros.
struct DigitalDesign {
  DigitizationParams params;
  DigitalFilter filter;
  AnalogFilter prototype;  // prewarped, truncated s-plane filter fed to bilinear()
  std::size_t poles_kept = 0;
  std::size_t poles_dropped = 0;
};

/// Fraction of fs that zeros are clamped to and leveling poles sit at.
inline constexpr double kClampFraction = 0.499;

/// Full pipeline: truncate poles at Nyquist, prewarp every break, map through
/// the bilinear transform, then rescale so the digital magnitude at the band
/// center equals the analog design's.
inline DigitalDesign digitize(const Design& design, double fs_hz) {
  const double f1 = design.placement.f1_hz;
  DigitalDesign out;
  out.params = make_digitization_params(f1, fs_hz);

  const AnalogFilter& analog = design.filter;
  std::vector<double> pole_breaks;
  pole_breaks.reserve(analog.poles.size());
  for (double p : analog.poles) pole_breaks.push_back(-p / kTwoPi);
  // Repeated integer-slope poles share a break; truncation only looks at the
  // strictly increasing tail.
  const std::size_t repeats = static_cast<std::size_t>(std::max(0, -design.spec.integer_part()));
  const std::size_t kept_array =
      truncate_to_nyquist(std::span<const double>(pole_breaks).subspan(repeats), fs_hz);
  out.poles_kept = repeats + kept_array;
  out.poles_dropped = analog.poles.size() - out.poles_kept;

  const double clamp_hz = kClampFraction * fs_hz;
  auto warp = [&](double root) {
    const double hz = std::min(-root / kTwoPi, clamp_hz);
    return -kTwoPi * prewarp_break(hz, f1, fs_hz);
  };

  AnalogFilter& proto = out.prototype;
  for (std::size_t k = 0; k < out.poles_kept; ++k) proto.poles.push_back(warp(analog.poles[k]));
  const std::size_t zeros_kept =
      analog.zeros.size() > out.poles_dropped ? analog.zeros.size() - out.poles_dropped : 0;
  for (std::size_t k = 0; k < zeros_kept; ++k) proto.zeros.push_back(warp(analog.zeros[k]));
  // Zeros without a partner pole get a leveling pole just under Nyquist.
  while (proto.poles.size() < proto.zeros.size()) proto.poles.push_back(warp(-kTwoPi * clamp_hz));
  proto.gain = 1.0;

  out.filter = bilinear(proto, out.params);

  const double ref_hz = std::min(design.band.center_hz(), 0.25 * fs_hz);
  const double want = std::abs(freq_response(analog, kTwoPi * ref_hz));
  const double have = std::abs(digital_response(out.filter, kTwoPi * ref_hz));
  out.filter.gain *= want / have;
  return out;
}

}  // namespace spectral_tilt
