#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "spectral_tilt/analog_design.hpp"
#include "spectral_tilt/digitize.hpp"
#include "spectral_tilt/runtime.hpp"

namespace spectral_tilt {

/// Deterministic standard-normal stream. Sample i depends only on (seed, i):
/// a SplitMix64-mixed counter gives a uniform in (0, 1), which the inverse
/// normal CDF maps to N(0, 1).
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : seed_(seed) {}

  static double uniform_at(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t x = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
  }

  double next() {
    const double u = uniform_at(seed_, counter_++);
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
  }

  void fill(std::span<double> out) {
    for (double& v : out) v = next();
  }

  std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

inline constexpr int kDefaultOrder = 20;
inline constexpr int kDefaultSkip = 3;

/// White noise from `seed` filtered through the digitized `design`.
inline std::vector<double> colored_noise(std::uint64_t seed, std::size_t n_samples, double fs_hz,
                                         const Design& design) {
  if (n_samples == 0) throw Error(Errc::invalid_input, "need at least one sample");
  FilterState state(digitize(design, fs_hz).filter);
  NoiseSource source(seed);
  std::vector<double> out(n_samples);
  source.fill(out);
  state.process(out, out);
  return out;
}

/// 1/f (pink) noise: alpha = -1/2 with the default order and skip.
inline std::vector<double> pink_noise(std::uint64_t seed, std::size_t n_samples, double fs_hz,
                                      const BandSpec& band) {
  return colored_noise(seed, n_samples, fs_hz,
                       make_design(SlopeSpec(-0.5), kDefaultOrder, kDefaultSkip, band));
}

}  // namespace spectral_tilt
