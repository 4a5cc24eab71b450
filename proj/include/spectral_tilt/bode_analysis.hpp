#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "spectral_tilt/analog_design.hpp"
#include "spectral_tilt/error.hpp"

namespace spectral_tilt {

/// ln H(j omega) split into log-magnitude (nepers) and phase (radians).
struct LogResponse {
  double log_mag = 0.0;
  double phase = 0.0;
};

inline LogResponse log_response(const AnalogFilter& filter, double omega) {
  if (!(omega >= 0.0)) throw Error(Errc::invalid_input, "omega must be >= 0");
  for (double p : filter.poles) {
    if (p == 0.0) throw Error(Errc::pole_on_axis, "pole at s = 0");
  }
  LogResponse out;
  out.log_mag = std::log(filter.gain) + log_magnitude_unscaled(filter, omega);

  // arg(j w + a) with a = -root > 0; pairs use arg((j w + a)/(j w + b)).
  const double w2 = omega * omega;
  const std::size_t paired = std::min(filter.poles.size(), filter.zeros.size());
  double phase = 0.0;
  for (std::size_t k = 0; k < paired; ++k) {
    const double a = -filter.zeros[k];
    const double b = -filter.poles[k];
    phase += std::atan2(omega * (b - a), w2 + a * b);
  }
  for (std::size_t k = paired; k < filter.zeros.size(); ++k) {
    phase += std::atan2(omega, -filter.zeros[k]);
  }
  for (std::size_t k = paired; k < filter.poles.size(); ++k) {
    phase -= std::atan2(omega, -filter.poles[k]);
  }
  out.phase = phase;
  return out;
}

/// H(j omega) = g prod(j omega - z) / prod(j omega - p).
inline std::complex<double> freq_response(const AnalogFilter& filter, double omega) {
  const LogResponse lr = log_response(filter, omega);
  return std::polar(std::exp(lr.log_mag), lr.phase);
}

/// d ln|H| / d ln omega in closed form:
///   sum_m w^2 / (w^2 + z_m^2) - sum_n w^2 / (w^2 + p_n^2).
inline double log_mag_slope(const AnalogFilter& filter, double omega) {
  const double w2 = omega * omega;
  double from_zeros = 0.0;
  for (double z : filter.zeros) from_zeros += w2 / (w2 + z * z);
  double from_poles = 0.0;
  for (double p : filter.poles) from_poles += w2 / (w2 + p * p);
  return from_zeros - from_poles;
}

inline constexpr int kDefaultPointsPerInterval = 64;

/// Uniform grid in ln(omega).
struct BodeGrid {
  std::vector<double> omega_log;
  int points_per_interval = kDefaultPointsPerInterval;
};

struct Extremum {
  double omega_log = 0.0;
  double error = 0.0;
};

struct SlopeReport {
  BodeGrid grid;
  std::vector<double> slope;
  std::vector<double> error;
  std::pair<double, double> good_band;  // ln(rad/s)
  double max_abs_error_in_band = 0.0;
  std::vector<Extremum> extrema;
};

namespace detail {

// Vertex of the parabola through three equally spaced samples.
inline Extremum parabolic_peak(double x_mid, double step, double left, double mid, double right) {
  const double curvature = left - 2.0 * mid + right;
  if (curvature == 0.0) return {x_mid, mid};
  const double offset = 0.5 * (left - right) / curvature;
  return {x_mid + offset * step, mid - 0.25 * (left - right) * offset};
}

}  // namespace detail

/// Slope and slope error over the pole array, extended one pole interval
/// past each end, with points_per_interval samples per interval.
///
/// The good band runs from the k_skip-th to the (n-1-k_skip)-th pole break.
/// The error target is the total slope (alpha plus any integer part).
inline SlopeReport slope_report(const AnalogFilter& filter, const SlopeSpec& spec,
                                const PlacementResult& placement, int n, int k_skip,
                                int points_per_interval = kDefaultPointsPerInterval) {
  if (n < 1 || k_skip < 0 || 2 * k_skip >= n) {
    throw Error(Errc::bad_good_band, "need k_skip < n/2");
  }
  if (points_per_interval < 8) {
    throw Error(Errc::invalid_input, "points_per_interval must be >= 8");
  }
  const double log_p0 = std::log(kTwoPi * placement.f1_hz);
  const double log_r = placement.delta_p;
  const double step = log_r / points_per_interval;
  const double start = log_p0 - log_r;
  const auto count = static_cast<std::size_t>((n + 1) * points_per_interval + 1);

  SlopeReport report;
  report.grid.points_per_interval = points_per_interval;
  report.grid.omega_log.resize(count);
  report.slope.resize(count);
  report.error.resize(count);
  const double target = spec.total_slope();
  for (std::size_t i = 0; i < count; ++i) {
    const double x = start + static_cast<double>(i) * step;
    report.grid.omega_log[i] = x;
    report.slope[i] = log_mag_slope(filter, std::exp(x));
    report.error[i] = report.slope[i] - target;
  }

  // Grid index of pole j is (j + 1) * points_per_interval.
  const auto lo = static_cast<std::size_t>((k_skip + 1) * points_per_interval);
  const auto hi = static_cast<std::size_t>((n - k_skip) * points_per_interval);
  report.good_band = {log_p0 + k_skip * log_r, log_p0 + (n - 1 - k_skip) * log_r};

  double worst = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) worst = std::max(worst, std::abs(report.error[i]));
  report.max_abs_error_in_band = worst;

  const auto& e = report.error;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double before = e[i] - e[i - 1];
    const double after = e[i + 1] - e[i];
    if ((before > 0.0 && after < 0.0) || (before < 0.0 && after > 0.0)) {
      report.extrema.push_back(
          detail::parabolic_peak(report.grid.omega_log[i], step, e[i - 1], e[i], e[i + 1]));
    }
  }
  return report;
}

inline SlopeReport slope_report(const Design& design,
                                int points_per_interval = kDefaultPointsPerInterval) {
  return slope_report(design.filter, design.spec, design.placement, design.order, design.k_skip,
                      points_per_interval);
}

// ---------------------------------------------------------------------------
// Convergence toward the ideal fractional operator (j omega)^alpha.
// ---------------------------------------------------------------------------

/// One row of the convergence study for a given pole ratio.
template <typename Real>
struct ConvergenceRow {
  Real ratio;
  Real magnitude_error;  // nepers, after the best constant level offset
  Real phase_error;      // radians, vs alpha * pi / 2
};

struct ConvergenceOptions {
  double margin_nepers = 6.0;  // finite array reaches at least this far past the band
  int points_per_period = 16;  // grid density per ln(r)
  bool include_tails = true;   // add the analytically summed infinite tails
};

namespace detail {

/// Evaluates the doubly-infinite pole-zero array (pole magnitudes
/// b0 r^k, zero magnitudes b0 r^(k - alpha)) at frequency omega, returning
/// ln|H| up to an additive constant and arg H.
///
/// Pairs k in [k_lo, k_hi] are multiplied out explicitly. Pairs outside
/// that range are summed in closed form as geometric series of the Taylor
/// expansions of ln|.| and atan(.), which converge because the outermost
/// breaks sit far from omega.
template <typename Real>
class InfiniteArray {
 public:
  /// omega_lo / omega_hi bound the frequencies that will be evaluated; they
  /// fix how many tail-series terms are needed.
  InfiniteArray(Real alpha, Real base, Real log_r, long k_lo, long k_hi, bool tails,
                const Real& omega_lo, const Real& omega_hi) {
    using std::exp;
    using std::log;
    const long count = k_hi - k_lo + 1;
    pole_mag_.reserve(static_cast<std::size_t>(count));
    zero_mag_.reserve(static_cast<std::size_t>(count));
    for (long k = k_lo; k <= k_hi; ++k) {
      pole_mag_.push_back(base * exp(Real(k) * log_r));
      zero_mag_.push_back(base * exp((Real(k) - alpha) * log_r));
    }
    below_ = base * exp(Real(k_lo - 1) * log_r);
    above_ = base * exp(Real(k_hi + 1) * log_r);
    if (tails) build_tail_series(alpha, log_r, omega_lo, omega_hi);
  }

  std::pair<Real, Real> operator()(const Real& omega) const {
    using std::atan2;
    using std::log;
    const Real w2 = omega * omega;
    Real re = 1;
    Real im = 0;
    for (std::size_t k = 0; k < pole_mag_.size(); ++k) {
      // (j w + a) / (j w + b) = ((w^2 + a b) + j w (b - a)) / (w^2 + b^2)
      const Real& a = zero_mag_[k];
      const Real& b = pole_mag_[k];
      const Real den = w2 + b * b;
      const Real fr = (w2 + a * b) / den;
      const Real fi = omega * (b - a) / den;
      const Real nr = re * fr - im * fi;
      im = re * fi + im * fr;
      re = nr;
    }
    Real log_mag = log(re * re + im * im) / 2;
    Real phase = atan2(im, re);

    // Tails: sum_m (lo_coef_m (b_{k_lo-1}/w)^m + hi_coef_m (w/b_{k_hi+1})^m);
    // even m feed ln|H|, odd m feed arg H.
    const Real lo_x = below_ / omega;
    const Real hi_x = omega / above_;
    Real lo_pow = 1;
    Real hi_pow = 1;
    for (std::size_t m = 1; m < lo_coef_.size(); ++m) {
      lo_pow *= lo_x;
      hi_pow *= hi_x;
      const Real term = lo_coef_[m] * lo_pow + hi_coef_[m] * hi_pow;
      if (m % 2 == 0) {
        log_mag += term;
      } else {
        phase += term;
      }
    }
    return {log_mag, phase};
  }

 private:
  // Taylor series of ln(1 + y^2)/2 and atan(y), summed over each geometric
  // tail of pairs. With h = ln r, V_m = 1 / (1 - e^{-m h}):
  //   even m = 2j:  lo  (-1)^(j+1)/(2j) V_m (e^{-m alpha h} - 1)
  //                 hi  (-1)^(j+1)/(2j) V_m (e^{ m alpha h} - 1)
  //   odd m = 2j+1: lo  (-1)^j/m V_m (1 - e^{-m alpha h})
  //                 hi  (-1)^j/m V_m (e^{ m alpha h} - 1)
  void build_tail_series(const Real& alpha, const Real& h, const Real& omega_lo,
                         const Real& omega_hi) {
    using std::abs;
    using std::exp;
    using std::log;
    using std::max;
    const Real eps = std::numeric_limits<Real>::epsilon() / 1024;
    const Real x_max = max(below_ / omega_lo, omega_hi / above_);
    lo_coef_.assign(1, Real(0));
    hi_coef_.assign(1, Real(0));
    Real x_pow = 1;
    for (int m = 1; m < 10000; ++m) {
      x_pow *= x_max;
      const Real v = 1 / (1 - exp(-Real(m) * h));
      const Real up = exp(Real(m) * alpha * h) - 1;
      const Real down = exp(-Real(m) * alpha * h) - 1;
      Real lo;
      Real hi;
      if (m % 2 == 0) {
        const int j = m / 2;
        const Real sign = (j % 2 == 1) ? Real(1) : Real(-1);
        lo = sign / m * v * down;
        hi = sign / m * v * up;
      } else {
        const int j = (m - 1) / 2;
        const Real sign = (j % 2 == 0) ? Real(1) : Real(-1);
        lo = -sign / m * v * down;
        hi = sign / m * v * up;
      }
      lo_coef_.push_back(lo);
      hi_coef_.push_back(hi);
      if (m > 2 && (abs(lo) + abs(hi)) * x_pow <= eps) break;
    }
  }

  Real below_;
  Real above_;
  std::vector<Real> pole_mag_;
  std::vector<Real> zero_mag_;
  std::vector<Real> lo_coef_;
  std::vector<Real> hi_coef_;
};

template <typename Real>
Real pi_value() {
  using std::atan;
  return 4 * atan(Real(1));
}

template <typename Real>
long floor_to_long(const Real& x) {
  using std::floor;
  return static_cast<long>(floor(x));
}

template <typename Real>
long ceil_to_long(const Real& x) {
  using std::ceil;
  return static_cast<long>(ceil(x));
}

// Parabolic estimate of the extreme value near sample i.
template <typename Real>
Real refine_extreme(const std::vector<Real>& v, std::size_t i) {
  if (i == 0 || i + 1 >= v.size()) return v[i];
  const Real curvature = v[i - 1] - 2 * v[i] + v[i + 1];
  if (curvature == 0) return v[i];
  const Real offset = (v[i - 1] - v[i + 1]) / (2 * curvature);
  return v[i] - (v[i - 1] - v[i + 1]) * offset / 4;
}

}  // namespace detail

/// For each ratio r, measures how closely the array
///   prod_k (j w - p0 r^(k - alpha)) / (j w - p0 r^k)
/// matches e^{j alpha pi/2} w^alpha over the band. The magnitude error is
/// max |ln|H| - alpha ln w - C| with C the minimax level offset, since the
/// infinite product is only defined up to a constant scale.
///
/// `Real` may be a multiprecision type; the ripple shrinks roughly like
/// exp(-pi^2 / ln r) and falls below double precision for r < ~1.3.
template <typename Real = double>
std::vector<ConvergenceRow<Real>> conjecture_convergence(
    double alpha, double p0, std::span<const double> ratios, const BandSpec& band,
    const ConvergenceOptions& options = {}) {
  using std::abs;
  using std::log;
  if (!(alpha >= -1.0 && alpha <= 1.0)) throw Error(Errc::invalid_slope, "alpha outside [-1, 1]");
  if (!(p0 < 0.0)) throw Error(Errc::invalid_input, "p0 must be negative");
  if (options.margin_nepers < 6.0) {
    throw Error(Errc::invalid_input, "array must extend at least 6 nepers past the band");
  }
  const Real target_phase = Real(alpha) * detail::pi_value<Real>() / 2;
  const Real base = Real(-p0);
  const Real log_base = log(base);
  const Real log_lo = log(Real(kTwoPi) * Real(band.f_min_hz()));
  const Real log_hi = log(Real(kTwoPi) * Real(band.f_max_hz()));
  const Real margin = Real(options.margin_nepers);

  std::vector<ConvergenceRow<Real>> rows;
  rows.reserve(ratios.size());
  for (double r : ratios) {
    if (!(r > 1.0)) throw Error(Errc::invalid_input, "each ratio must exceed 1");
    const Real log_r = log(Real(r));
    const long k_lo = detail::floor_to_long((log_lo - margin - log_base) / log_r);
    const long k_hi = detail::ceil_to_long((log_hi + margin - log_base) / log_r);
    using std::exp;
    const detail::InfiniteArray<Real> array(Real(alpha), base, log_r, k_lo, k_hi,
                                            options.include_tails, exp(log_lo), exp(log_hi));

    const Real width = log_hi - log_lo;
    const long points =
        std::max<long>(64, detail::ceil_to_long(width / log_r * options.points_per_period)) + 1;
    const Real step = width / Real(points - 1);

    std::vector<Real> level(static_cast<std::size_t>(points));
    std::vector<Real> phase_dev(static_cast<std::size_t>(points));
    for (long i = 0; i < points; ++i) {
      const Real x = log_lo + Real(i) * step;
      const auto [lm, ph] = array(exp(x));
      level[static_cast<std::size_t>(i)] = lm - Real(alpha) * x;
      phase_dev[static_cast<std::size_t>(i)] = ph - target_phase;
    }

    const auto [lo_it, hi_it] = std::minmax_element(level.begin(), level.end());
    const Real top = detail::refine_extreme(level, static_cast<std::size_t>(hi_it - level.begin()));
    const Real bottom = detail::refine_extreme(level, static_cast<std::size_t>(lo_it - level.begin()));

    std::size_t worst = 0;
    for (std::size_t i = 1; i < phase_dev.size(); ++i) {
      if (abs(phase_dev[i]) > abs(phase_dev[worst])) worst = i;
    }
    rows.push_back({Real(r), (top - bottom) / 2, abs(detail::refine_extreme(phase_dev, worst))});
  }
  return rows;
}

}  // namespace spectral_tilt
