#pragma once

// Welch power spectral density estimate backed by FFTW. Test-only.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace oracle {

struct Psd {
  std::vector<double> freq_hz;
  std::vector<double> power;
};

/// Welch estimate: Hann window, 50% overlap, one-sided, averaged periodograms.
inline Psd welch(std::span<const double> x, double fs, std::size_t segment = 8192) {
  if (x.size() < segment) throw std::invalid_argument("signal shorter than one segment");
  const std::size_t hop = segment / 2;
  std::vector<double> window(segment);
  double window_power = 0.0;
  for (std::size_t i = 0; i < segment; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / segment);
    window_power += window[i] * window[i];
  }
  const std::size_t bins = segment / 2 + 1;
  double* in = fftw_alloc_real(segment);
  fftw_complex* out = fftw_alloc_complex(bins);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(segment), in, out, FFTW_ESTIMATE);

  Psd psd;
  psd.power.assign(bins, 0.0);
  std::size_t count = 0;
  for (std::size_t start = 0; start + segment <= x.size(); start += hop) {
    for (std::size_t i = 0; i < segment; ++i) in[i] = x[start + i] * window[i];
    fftw_execute(plan);
    for (std::size_t k = 0; k < bins; ++k) {
      psd.power[k] += out[k][0] * out[k][0] + out[k][1] * out[k][1];
    }
    ++count;
  }
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);

  psd.freq_hz.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    psd.freq_hz[k] = fs * static_cast<double>(k) / static_cast<double>(segment);
    double scale = 1.0 / (fs * window_power * static_cast<double>(count));
    if (k != 0 && k + 1 != bins) scale *= 2.0;
    psd.power[k] *= scale;
  }
  return psd;
}

/// Least-squares slope of log10(power) against log10(f) over [f_lo, f_hi].
inline double loglog_slope(const Psd& psd, double f_lo, double f_hi) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < psd.freq_hz.size(); ++k) {
    const double f = psd.freq_hz[k];
    if (f < f_lo || f > f_hi) continue;
    const double lx = std::log10(f);
    const double ly = std::log10(psd.power[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace oracle
