/// @file image_io.hpp
/// @brief Image and float-grid files. PNG (8-bit via libpng), binary PPM/PGM
///        (P6/P5, maxval up to 65535) and the float-grid format:
///
///   critflow-grid 1
///   <nx> <ny> <channels>
///   <key> <value>        (zero or more metadata lines)
///   data
///   <nx*ny*channels little-endian float64, row-major, channels interleaved>
///
/// Image row j maps to grid row j. Intensities map to [0, 1].

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "critflow/exponent.hpp"
#include "critflow/grid.hpp"

namespace critflow {

struct FloatGrid {
  VectorField field;
  std::map<std::string, std::string> meta;
};

/// Reads a PNG, PPM/PGM or float-grid file (chosen by content, not name).
/// Colour images give N = 3, grayscale N = 1. Throws InvalidInput with the
/// path and reason on failure.
VectorField load_image(const std::filesystem::path& path, double h = 1.0);

/// Writes by extension: .png, .ppm (N = 3), .pgm (N = 1) or .grid.
/// 8-bit formats clamp to [0, 1] and round to the nearest level.
void save_image(const std::filesystem::path& path, const VectorField& u);

FloatGrid load_float_grid(const std::filesystem::path& path, double h = 1.0);
void save_float_grid(const std::filesystem::path& path, const VectorField& u,
                     const std::map<std::string, std::string>& meta = {});

/// Exponent field as a float grid with p_plus and gap in the metadata.
void save_exponent_grid(const std::filesystem::path& path, const ExponentField& p);
ExponentField load_exponent_grid(const std::filesystem::path& path, double h = 1.0);

/// Linear grayscale map of p: p_minus -> 0, p_plus -> 1 (all 0 if they agree).
VectorField render_exponent(const ExponentField& p);
/// 1 on the mask, 0 elsewhere.
VectorField render_mask(const CellMask& mask);

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace critflow
