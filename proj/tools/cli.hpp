#pragma once

// Command-line front end. Exit codes: 0 success, 2 usage or validation
// error, 1 internal error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spectral_tilt/spectral_tilt.hpp"

namespace spectral_tilt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Opens `path` for writing, or hands back `fallback` when path is empty or "-".
class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback, bool binary = false) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, binary ? std::ios::binary : std::ios::out);
    if (!*file_) throw UsageError("cannot open output file " + path);
    os_ = file_.get();
  }
  std::ostream& stream() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

class InputSource {
 public:
  InputSource(const std::string& path, std::istream& fallback, bool binary = false) {
    if (path.empty() || path == "-") {
      is_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ifstream>(path, binary ? std::ios::binary : std::ios::in);
    if (!*file_) throw UsageError("cannot open input file " + path);
    is_ = file_.get();
  }
  std::istream& stream() { return *is_; }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* is_ = nullptr;
};

inline Design load_design(const std::string& path, std::istream& fallback) {
  InputSource src(path, fallback);
  return io::read_design(src.stream());
}

struct Sweep {
  double from = 0.0;
  double to = 0.0;
  double seconds = 0.0;
};

inline Sweep parse_sweep(const std::string& text) {
  Sweep s;
  char c1 = 0;
  char c2 = 0;
  std::istringstream iss(text);
  iss.imbue(std::locale::classic());
  if (!(iss >> s.from >> c1 >> s.to >> c2 >> s.seconds) || c1 != ':' || c2 != ':' ||
      !(iss >> std::ws).eof()) {
    throw UsageError("--alpha-sweep expects a0:a1:seconds, got \"" + text + "\"");
  }
  if (!(s.seconds > 0.0)) throw UsageError("--alpha-sweep duration must be positive");
  if (std::abs(s.from) > 1.0 || std::abs(s.to) > 1.0) {
    throw UsageError("--alpha-sweep endpoints must lie in [-1, 1]");
  }
  return s;
}

}  // namespace detail

/// Runs one invocation. `argv[0]` is the program name.
inline int run(int argc, const char* const* argv, Streams io) {
  CLI::App app{
      "Fractional-slope (spectral tilt) filter designer.\n"
      "Builds |H(jw)| ~ w^alpha from geometrically spaced real pole-zero pairs.\n"
      "The band [fmin, fmax] corresponds to f0 = fmin and bw = fmax - fmin."};
  app.require_subcommand(1);

  // design
  double alpha = 0.0;
  int integer_part = 0;
  int order = kDefaultOrder;
  int skip = kDefaultSkip;
  double fmin = 20.0;
  double fmax = 20000.0;
  std::string out_path;
  auto* design_cmd = app.add_subcommand("design", "Solve pole placement and write a design file");
  design_cmd->add_option("--alpha", alpha, "Fractional slope in nepers per neper, in [-1, 1]")
      ->required();
  design_cmd->add_option("--integer-part", integer_part,
                         "Extra integer slope (|value| <= 4), realized below the array");
  design_cmd->add_option("-N,--order", order, "Number of poles N")->capture_default_str();
  design_cmd->add_option("-K,--skip", skip, "Poles placed outside each band edge")
      ->capture_default_str();
  design_cmd->add_option("--fmin", fmin, "Lower band edge f0 in Hz")->capture_default_str();
  design_cmd->add_option("--fmax", fmax, "Upper band edge f0 + bw in Hz")->capture_default_str();
  design_cmd->add_option("-o,--out", out_path, "Output file (default stdout)");

  // bode
  std::string design_path;
  int points_per_interval = kDefaultPointsPerInterval;
  auto* bode_cmd = app.add_subcommand("bode", "Write the Bode magnitude/phase/slope CSV");
  bode_cmd->add_option("--design", design_path, "Design file from `design`")->required();
  bode_cmd->add_option("--points-per-interval", points_per_interval,
                       "Grid points per pole interval (>= 8)")
      ->capture_default_str();
  bode_cmd->add_option("-o,--out", out_path, "Output file (default stdout)");

  // digitize
  double fs = 48000.0;
  auto* digitize_cmd = app.add_subcommand("digitize", "Bilinear-transform a design to first-order sections");
  digitize_cmd->add_option("--design", design_path, "Design file from `design`")->required();
  digitize_cmd->add_option("--fs", fs, "Sample rate in Hz")->required();
  digitize_cmd->add_option("-o,--out", out_path, "Output file (default stdout)");

  // apply
  std::string coeffs_path;
  std::string sweep_text;
  std::string in_path;
  std::size_t block = kDefaultControlBlock;
  auto* apply_cmd = app.add_subcommand(
      "apply", "Filter raw float64 little-endian samples (stdin to stdout by default)");
  auto* coeffs_opt = apply_cmd->add_option("--coeffs", coeffs_path, "Coefficient file from `digitize`");
  auto* apply_design_opt = apply_cmd->add_option("--design", design_path, "Design file");
  auto* apply_fs_opt = apply_cmd->add_option("--fs", fs, "Sample rate in Hz (with --design)");
  apply_cmd->add_option("--alpha-sweep", sweep_text,
                        "Linear alpha sweep a0:a1:seconds, applied per control block (needs --design)");
  apply_cmd->add_option("--block", block, "Control block size in samples")->capture_default_str();
  apply_cmd->add_option("-i,--in", in_path, "Input file (default stdin)");
  apply_cmd->add_option("-o,--out", out_path, "Output file (default stdout)");
  coeffs_opt->excludes(apply_design_opt);
  coeffs_opt->excludes(apply_fs_opt);
  apply_fs_opt->needs(apply_design_opt);

  // noise
  double color = -0.5;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  auto* noise_cmd = app.add_subcommand("noise", "Write seeded colored noise as raw float64");
  noise_cmd->add_option("--color", color, "Slope alpha of the amplitude spectrum (-0.5 = pink)")
      ->capture_default_str();
  noise_cmd->add_option("--seed", seed, "Generator seed")->capture_default_str();
  noise_cmd->add_option("--samples", samples, "Number of samples (>= 1)")->required();
  noise_cmd->add_option("--fs", fs, "Sample rate in Hz")->capture_default_str();
  noise_cmd->add_option("--fmin", fmin, "Lower band edge in Hz")->capture_default_str();
  noise_cmd->add_option("--fmax", fmax, "Upper band edge in Hz")->capture_default_str();
  noise_cmd->add_option("-N,--order", order, "Number of poles N")->capture_default_str();
  noise_cmd->add_option("-K,--skip", skip, "Poles outside each band edge")->capture_default_str();
  noise_cmd->add_option("-o,--out", out_path, "Output file (default stdout)");

  // sweep
  int n_min = 6;
  int n_max = 40;
  int n_step = 1;
  std::vector<int> skips{0, 1, 2, 3};
  auto* sweep_cmd = app.add_subcommand("sweep", "Tabulate max in-band slope error over (N, K)");
  sweep_cmd->add_option("--alpha", alpha, "Fractional slope in [-1, 1]")->required();
  sweep_cmd->add_option("--fmin", fmin, "Lower band edge in Hz")->capture_default_str();
  sweep_cmd->add_option("--fmax", fmax, "Upper band edge in Hz")->capture_default_str();
  sweep_cmd->add_option("--n-min", n_min, "Smallest N")->capture_default_str();
  sweep_cmd->add_option("--n-max", n_max, "Largest N")->capture_default_str();
  sweep_cmd->add_option("--n-step", n_step, "N increment")->capture_default_str();
  sweep_cmd->add_option("--k", skips, "Skip counts K to tabulate")->delimiter(',');
  sweep_cmd->add_option("--points-per-interval", points_per_interval, "Grid points per pole interval")
      ->capture_default_str();
  sweep_cmd->add_option("-o,--out", out_path, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, io.out, io.err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, io.out, io.err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, io.out, io.err);
    return kExitUsage;
  }

  try {
    if (design_cmd->parsed()) {
      const Design d = make_design(SlopeSpec(alpha, integer_part), order, skip, BandSpec(fmin, fmax));
      detail::OutputTarget target(out_path, io.out);
      io::write_design(target.stream(), d);
    } else if (bode_cmd->parsed()) {
      const Design d = detail::load_design(design_path, io.in);
      const SlopeReport report = slope_report(d, points_per_interval);
      detail::OutputTarget target(out_path, io.out);
      io::write_bode_csv(target.stream(), d, report);
    } else if (digitize_cmd->parsed()) {
      const Design d = detail::load_design(design_path, io.in);
      if (!(fs > 2.0 * d.band.f_min_hz())) throw detail::UsageError("--fs must exceed 2 * f_min");
      const DigitalDesign dd = digitize(d, fs);
      detail::OutputTarget target(out_path, io.out);
      io::write_coefficients(target.stream(), dd.filter);
      io.err << "digitize: kept " << dd.poles_kept << " of " << d.filter.poles.size()
             << " poles (" << dd.poles_dropped << " above Nyquist truncated)\n";
    } else if (apply_cmd->parsed()) {
      if (block == 0) throw detail::UsageError("--block must be positive");
      std::optional<detail::Sweep> sweep;
      if (!sweep_text.empty()) sweep = detail::parse_sweep(sweep_text);

      std::optional<TiltFilter> tilt;
      std::optional<FilterState> fixed;
      double rate = 0.0;
      if (!coeffs_path.empty()) {
        if (sweep) throw detail::UsageError("--alpha-sweep needs --design, not --coeffs");
        detail::InputSource src(coeffs_path, io.in);
        DigitalFilter f = io::read_coefficients(src.stream());
        rate = f.sample_rate_hz;
        fixed.emplace(std::move(f));
      } else if (!design_path.empty()) {
        if (apply_fs_opt->count() == 0) throw detail::UsageError("--design needs --fs");
        tilt.emplace(detail::load_design(design_path, io.in), fs);
        rate = fs;
      } else {
        throw detail::UsageError("apply needs --coeffs FILE or --design FILE --fs HZ");
      }

      detail::InputSource src(in_path, io.in, true);
      detail::OutputTarget target(out_path, io.out, true);
      std::size_t done = 0;
      for (;;) {
        std::vector<double> chunk = io::read_samples(src.stream(), block);
        if (chunk.empty()) break;
        for (double v : chunk) {
          if (std::isnan(v)) throw Error(Errc::invalid_input, "NaN in input stream");
        }
        if (tilt) {
          if (sweep) {
            const double t = static_cast<double>(done) / rate;
            const double frac = std::min(1.0, t / sweep->seconds);
            tilt->set_alpha(sweep->from + (sweep->to - sweep->from) * frac);
          }
          tilt->process(chunk, chunk);
        } else {
          fixed->process(chunk, chunk);
        }
        io::write_samples(target.stream(), chunk);
        done += chunk.size();
      }
      target.stream().flush();
    } else if (noise_cmd->parsed()) {
      if (samples == 0) throw detail::UsageError("--samples must be >= 1");
      const Design d = make_design(SlopeSpec(color), order, skip, BandSpec(fmin, fmax));
      const std::vector<double> noise = colored_noise(seed, samples, fs, d);
      detail::OutputTarget target(out_path, io.out, true);
      io::write_samples(target.stream(), noise);
      target.stream().flush();
    } else if (sweep_cmd->parsed()) {
      if (n_step < 1) throw detail::UsageError("--n-step must be >= 1");
      std::sort(skips.begin(), skips.end());
      skips.erase(std::unique(skips.begin(), skips.end()), skips.end());
      const SlopeSpec spec(alpha);
      const BandSpec band(fmin, fmax);
      std::ostringstream table;
      std::size_t rows = 0;
      for (int n = n_min; n <= n_max; n += n_step) {
        for (int k : skips) {
          if (k < 0 || n - 1 - 2 * k < 1) continue;
          const Design d = make_design(spec, n, k, band);
          const SlopeReport report = slope_report(d, points_per_interval);
          table << n << ',' << k << ',' << io::format_real(report.max_abs_error_in_band) << '\n';
          ++rows;
        }
      }
      if (rows == 0) throw detail::UsageError("sweep grid is empty: no valid (N, K) pair");
      detail::OutputTarget target(out_path, io.out);
      target.stream() << "n,k,max_abs_slope_error\n" << table.str();
    }
  } catch (const detail::UsageError& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    io.err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace spectral_tilt::cli
