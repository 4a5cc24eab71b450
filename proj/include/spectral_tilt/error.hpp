#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spectral_tilt {

enum class Errc {
  invalid_slope,
  invalid_band,
  degenerate_order,
  bad_good_band,
  pole_on_axis,
  above_nyquist,
  empty_design,
  unstable_map,
  out_of_range,
  invalid_input,
  malformed_file,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_slope: return "InvalidSlope";
    case Errc::invalid_band: return "InvalidBand";
    case Errc::degenerate_order: return "DegenerateOrder";
    case Errc::bad_good_band: return "BadGoodBand";
    case Errc::pole_on_axis: return "PoleOnAxis";
    case Errc::above_nyquist: return "AboveNyquist";
    case Errc::empty_design: return "EmptyDesign";
    case Errc::unstable_map: return "UnstableMap";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::invalid_input: return "InvalidInput";
    case Errc::malformed_file: return "MalformedFile";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace spectral_tilt
