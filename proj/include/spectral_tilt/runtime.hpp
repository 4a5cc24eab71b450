#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spectral_tilt/analog_design.hpp"
#include "spectral_tilt/digitize.hpp"
#include "spectral_tilt/error.hpp"

namespace spectral_tilt {

/// Streaming realization of a DigitalFilter: one transposed direct-form
/// first-order section per entry, one state value each.
class FilterState {
 public:
  explicit FilterState(DigitalFilter filter)
      : filter_(std::move(filter)), state_(filter_.sections.size(), 0.0) {}

  const DigitalFilter& filter() const noexcept { return filter_; }
  std::span<const double> state() const noexcept { return state_; }
  void reset() { std::fill(state_.begin(), state_.end(), 0.0); }

  /// Filters `in` into `out` (same length; may alias). Non-finite input is
  /// rejected before any state changes.
  void process(std::span<const double> in, std::span<double> out) {
    if (in.size() != out.size()) throw Error(Errc::invalid_input, "block size mismatch");
    for (double x : in) {
      if (!std::isfinite(x)) throw Error(Errc::invalid_input, "non-finite input sample");
    }
    const double gain = filter_.gain;
    const std::size_t n_sections = state_.size();
    for (std::size_t t = 0; t < in.size(); ++t) {
      double v = in[t];
      for (std::size_t k = 0; k < n_sections; ++k) {
        const Section& s = filter_.sections[k];
        const double y = s.b0 * v + state_[k];
        state_[k] = s.b1 * v - s.a1 * y;
        v = y;
      }
      out[t] = gain * v;
    }
  }

  std::vector<double> process(std::span<const double> in) {
    std::vector<double> out(in.size());
    process(in, out);
    return out;
  }

  /// Replaces the numerators only. Denominators and state stay as they are.
  void replace_numerators(std::span<const Section> sections) {
    if (sections.size() != filter_.sections.size()) {
      throw Error(Errc::invalid_input, "section count changed");
    }
    for (std::size_t k = 0; k < sections.size(); ++k) {
      if (sections[k].a1 != filter_.sections[k].a1) {
        throw Error(Errc::invalid_input, "denominator changed under modulation");
      }
      filter_.sections[k].b0 = sections[k].b0;
      filter_.sections[k].b1 = sections[k].b1;
    }
  }

 private:
  DigitalFilter filter_;
  std::vector<double> state_;
};

/// Slides the zero array to `alpha` (z_k = p_k r^-alpha), re-prewarps and
/// re-maps the zeros, and swaps in the new numerators. Poles, the block gain,
/// and the section states are untouched, so the response pivots about its
/// high-frequency level, where every section tends to unity.
inline void set_alpha(FilterState& state, double alpha, const Design& design, double fs_hz) {
  if (!(alpha >= -1.0 && alpha <= 1.0)) {
    throw Error(Errc::out_of_range, "alpha must lie in [-1, 1], got " + std::to_string(alpha));
  }
  const DigitalDesign updated = digitize(with_alpha(design, alpha), fs_hz);
  state.replace_numerators(updated.filter.sections);
}

/// Single-slot handoff of a new alpha from a control thread to the audio
/// thread. A newer post overwrites an unconsumed one.
class AlphaMailbox {
 public:
  void post(double alpha) {
    std::lock_guard<std::mutex> lock(mutex_);
    pending_ = alpha;
  }

  std::optional<double> take() {
    std::lock_guard<std::mutex> lock(mutex_);
    return std::exchange(pending_, std::nullopt);
  }

 private:
  std::mutex mutex_;
  std::optional<double> pending_;
};

inline constexpr std::size_t kDefaultControlBlock = 64;

/// A digitized design that can have its slope changed between blocks.
class TiltFilter {
 public:
  TiltFilter(Design design, double fs_hz)
      : design_(std::move(design)),
        fs_hz_(fs_hz),
        alpha_(design_.spec.alpha()),
        state_(digitize(design_, fs_hz).filter) {}

  double alpha() const noexcept { return alpha_; }
  const FilterState& state() const noexcept { return state_; }
  const Design& design() const noexcept { return design_; }

  void set_alpha(double alpha) {
    spectral_tilt::set_alpha(state_, alpha, design_, fs_hz_);
    alpha_ = alpha;
  }

  /// Applies any alpha posted to the mailbox, then filters the block.
  void process(std::span<const double> in, std::span<double> out, AlphaMailbox* mailbox = nullptr) {
    if (mailbox != nullptr) {
      if (auto next = mailbox->take()) set_alpha(*next);
    }
    state_.process(in, out);
  }

 private:
  Design design_;
  double fs_hz_;
  double alpha_;
  FilterState state_;
};

}  // namespace spectral_tilt
