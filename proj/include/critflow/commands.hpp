/// @file commands.hpp
/// @brief Subcommand bodies behind the critflow executable. Each returns the
///        process exit status and writes its human-readable output to `out`.

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "critflow/config.hpp"
#include "critflow/grid.hpp"

namespace critflow {

/// Peak-1 PSNR in dB; +inf for identical fields.
double psnr(const VectorField& a, const VectorField& b);

/// u + N(0, sigma^2) per value from mt19937_64(seed); sigma = 0 copies u.
VectorField add_gaussian_noise(const VectorField& u, double sigma, std::uint64_t seed);

struct DenoiseReport {
  double psnr_noisy = 0.0;
  double psnr_restored = 0.0;
  std::size_t steps = 0;
  double step_size = 0.0;  ///< dt or tau
  bool inner_warning = false;
  RunManifest resolved;
};

/// Loads m.input, adds noise, builds the exponent, runs the scheme and
/// writes into m.output_dir: restored.png, restored.grid, noisy.png,
/// noisy.grid, exponent.grid, energy.csv and manifest.ini (with dt / tau
/// resolved, so the manifest re-runs the same computation).
DenoiseReport cmd_denoise(const RunManifest& m, std::ostream& out);

struct ExponentMapReport {
  double p_minus = 0.0;
  double p_plus = 0.0;
  std::size_t critical_cells = 0;
};

/// Writes exponent.grid, exponent.png, critical_mask.png and
/// exponent_summary.txt into m.output_dir.
ExponentMapReport cmd_exponent_map(const RunManifest& m, std::ostream& out);

struct VerifyOptions {
  bool flip_divergence_sign = false;  ///< mutation canary for the adjointness check
  std::optional<std::string> only;    ///< run the checks whose name contains this
};

/// Runs the acceptance registry, one line per check. 0 iff all pass.
int cmd_verify(const VerifyOptions& options, std::ostream& out);

/// Compares two energy CSV files column by column. 0 iff headers and row
/// counts agree and every numeric difference is <= tol.
int cmd_trace_compare(const std::filesystem::path& a, const std::filesystem::path& b, double tol,
                      std::ostream& out);

}  // namespace critflow
