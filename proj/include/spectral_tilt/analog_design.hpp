#pragma once

// Closed-form s-plane design of approximate fractional integrators and
// differentiators: real poles spaced geometrically along the negative real
// axis, with a zero array slid against them to set the log-log slope.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "spectral_tilt/error.hpp"

namespace spectral_tilt {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Target slope of ln|H| against ln(omega), in nepers per neper.
///
/// The fractional part `alpha` is realized by the pole-zero array. The
/// optional integer part adds extra poles (negative) or zeros (positive)
/// below the array.
class SlopeSpec {
 public:
  static constexpr int kMaxIntegerPart = 4;

  explicit SlopeSpec(double alpha, int integer_part = 0)
      : alpha_(alpha), integer_part_(integer_part) {
    if (!(alpha >= -1.0 && alpha <= 1.0)) {
      throw Error(Errc::invalid_slope,
                  "alpha must lie in [-1, 1], got " + std::to_string(alpha));
    }
    if (integer_part < -kMaxIntegerPart || integer_part > kMaxIntegerPart) {
      throw Error(Errc::invalid_slope, "integer part must satisfy |integer_part| <= 4");
    }
  }

  double alpha() const noexcept { return alpha_; }
  int integer_part() const noexcept { return integer_part_; }
  double total_slope() const noexcept { return alpha_ + integer_part_; }

 private:
  double alpha_;
  int integer_part_;
};

/// Band of interest [f_min, f_max] in Hz.
class BandSpec {
 public:
  BandSpec(double f_min_hz, double f_max_hz) : f_min_(f_min_hz), f_max_(f_max_hz) {
    if (!(f_min_hz > 0.0) || !(f_max_hz > f_min_hz) || !std::isfinite(f_max_hz)) {
      throw Error(Errc::invalid_band, "band requires 0 < f_min < f_max");
    }
  }

  double f_min_hz() const noexcept { return f_min_; }
  double f_max_hz() const noexcept { return f_max_; }
  /// Log-geometric center sqrt(f_min * f_max).
  double center_hz() const noexcept { return std::sqrt(f_min_ * f_max_); }

 private:
  double f_min_;
  double f_max_;
};

/// First break frequency and pole ratio solved from (order, skip, band).
struct PlacementResult {
  double f1_hz = 0.0;
  double ratio = 0.0;
  double delta_p = 0.0;  // ln(ratio)

  /// Log distance from each pole to its zero: -alpha * delta_p.
  double delta_z(double alpha) const noexcept { return -alpha * delta_p; }
  /// Duty cycle of the pole/zero step train; recovers alpha.
  static double duty_cycle(double delta_z, double delta_p) noexcept { return -delta_z / delta_p; }
};

/// s-plane prototype H(s) = gain * prod(s - z) / prod(s - p) with real
/// negative roots, each list sorted by increasing magnitude.
struct AnalogFilter {
  std::vector<double> poles;
  std::vector<double> zeros;
  double gain = 1.0;
};

/// Solves the log-linear system
///
///   ln f1 +           k_skip  * ln r = ln f_min
///   ln f1 + (n - k_skip - 1) * ln r = ln f_max
///
/// so that k_skip poles fall below f_min and k_skip poles above f_max.
inline PlacementResult place_poles(int n, int k_skip, const BandSpec& band) {
  const int det = n - 1 - 2 * k_skip;
  if (n < 2 || k_skip < 0 || det <= 0) {
    throw Error(Errc::degenerate_order,
                "need n - 1 - 2*k_skip >= 1 (n=" + std::to_string(n) +
                    ", k_skip=" + std::to_string(k_skip) + ")");
  }
  const double log_min = std::log(band.f_min_hz());
  const double log_max = std::log(band.f_max_hz());
  const double log_r = (log_max - log_min) / det;
  const double log_f1 = log_min - k_skip * log_r;

  PlacementResult out;
  out.f1_hz = std::exp(log_f1);
  out.ratio = std::exp(log_r);
  out.delta_p = log_r;
  return out;
}

/// Break frequency of the extra integer-slope roots, two decades below f1.
inline double integer_break_hz(const PlacementResult& placement) { return placement.f1_hz / 100.0; }

/// Builds the pole array p_k = -2 pi f1 r^k (k = 0..n-1) and the zero array
/// z_k = p_k r^-alpha, plus any integer-slope roots. Gain is left at 1;
/// see normalize_gain().
inline AnalogFilter make_analog_filter(const SlopeSpec& spec, const PlacementResult& placement,
                                       int n) {
  if (n < 1) throw Error(Errc::degenerate_order, "filter needs at least one pole");
  if (!(placement.ratio > 1.0) || !(placement.f1_hz > 0.0)) {
    throw Error(Errc::invalid_input, "placement requires r > 1 and f1 > 0");
  }
  const double r = placement.ratio;
  const double zero_scale = std::pow(r, -spec.alpha());

  AnalogFilter filter;
  filter.poles.reserve(static_cast<std::size_t>(n + std::max(0, -spec.integer_part())));
  filter.zeros.reserve(static_cast<std::size_t>(n + std::max(0, spec.integer_part())));

  // Recursive products keep z_k == p_{k+1} bit-exact at alpha = -1.
  double p = -kTwoPi * placement.f1_hz;
  for (int k = 0; k < n; ++k) {
    filter.poles.push_back(p);
    filter.zeros.push_back(p * zero_scale);
    p *= r;
  }

  const double extra = -kTwoPi * integer_break_hz(placement);
  auto& extra_roots = spec.integer_part() < 0 ? filter.poles : filter.zeros;
  extra_roots.insert(extra_roots.begin(), static_cast<std::size_t>(std::abs(spec.integer_part())),
                     extra);
  auto by_magnitude = [](double a, double b) { return a > b; };
  std::stable_sort(filter.zeros.begin(), filter.zeros.end(), by_magnitude);
  return filter;
}

/// ln|H(j omega)| without the gain, accumulated pairwise so that long arrays
/// neither overflow nor lose the small per-pair differences.
inline double log_magnitude_unscaled(const AnalogFilter& filter, double omega) {
  const double w2 = omega * omega;
  const std::size_t paired = std::min(filter.poles.size(), filter.zeros.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < paired; ++k) {
    const double z = filter.zeros[k];
    const double p = filter.poles[k];
    acc += 0.5 * std::log1p((z * z - p * p) / (w2 + p * p));
  }
  for (std::size_t k = paired; k < filter.zeros.size(); ++k) {
    acc += 0.5 * std::log(w2 + filter.zeros[k] * filter.zeros[k]);
  }
  for (std::size_t k = paired; k < filter.poles.size(); ++k) {
    acc -= 0.5 * std::log(w2 + filter.poles[k] * filter.poles[k]);
  }
  return acc;
}

/// Scales the gain so |H(j 2 pi sqrt(f_min f_max))| = 1.
inline AnalogFilter normalize_gain(AnalogFilter filter, const BandSpec& band) {
  const double omega_c = kTwoPi * band.center_hz();
  filter.gain = std::exp(-log_magnitude_unscaled(filter, omega_c));
  return filter;
}

/// Complete design record: inputs, solved placement, and the s-plane filter.
struct Design {
  SlopeSpec spec{0.0};
  int order = 0;
  int k_skip = 0;
  BandSpec band{1.0, 2.0};
  PlacementResult placement;
  AnalogFilter filter;
};

inline Design make_design(const SlopeSpec& spec, int order, int k_skip, const BandSpec& band) {
  Design d{spec, order, k_skip, band, place_poles(order, k_skip, band), {}};
  d.filter = normalize_gain(make_analog_filter(spec, d.placement, order), band);
  return d;
}

/// Same poles and band, zero array slid to a new alpha.
inline Design with_alpha(const Design& design, double alpha) {
  Design d = design;
  d.spec = SlopeSpec(alpha, design.spec.integer_part());
  d.filter = normalize_gain(make_analog_filter(d.spec, d.placement, d.order), d.band);
  return d;
}

}  // namespace spectral_tilt
