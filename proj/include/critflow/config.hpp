/// @file config.hpp
/// @brief Run manifest: every resolved setting of a restoration run, stored
///        as sectioned key = value text. Parsing a serialized manifest gives
///        back an equal manifest (doubles are written with 17 digits).

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace critflow {

inline constexpr const char* kVersion = "0.1.0";

struct RunManifest {
  // [io]
  std::string input;
  std::string output_dir = ".";
  double h = 1.0;
  // [noise]
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  // [exponent]  mode: edge_adaptive | constant (p = p_max everywhere)
  std::string exponent_mode = "edge_adaptive";
  double p_max = 2.0;
  double eta = 0.1;
  double k = 4000.0;
  double gauss_sigma = 1.5;
  // [flow]  scheme: explicit | prox
  std::string scheme = "explicit";
  double eps = 1e-2;
  double delta = 0.0;
  double T = 0.25;
  std::optional<double> dt;   ///< unset: stability_dt
  // [prox]
  std::optional<double> tau;  ///< unset: h
  double eps_inner = 1e-6;
  double tol = 1e-8;
  std::uint64_t max_inner = 100000;
  // [fidelity]  kind: none | linear_tether (towards the noisy image)
  std::string fidelity = "none";
  double lambda = 0.0;
  // [version]
  std::string version = kVersion;

  bool operator==(const RunManifest&) const = default;

  /// Throws InvalidInput on unknown modes or out-of-range values.
  void validate() const;
};

std::string serialize_manifest(const RunManifest& m);
/// Missing keys keep their defaults; unknown keys are rejected.
RunManifest parse_manifest(const std::string& text);
RunManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const RunManifest& m);

/// "%.17g"
std::string format_double(double v);

}  // namespace critflow
