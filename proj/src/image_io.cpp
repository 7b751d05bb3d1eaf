#include "critflow/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace critflow {

namespace fs = std::filesystem;

namespace {

constexpr const char* kGridMagic = "critflow-grid 1";

[[noreturn]] void fail(const fs::path& path, const std::string& reason) {
  throw InvalidInput(path.string() + ": " + reason);
}

std::uint8_t quantize8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

VectorField decode_png(const fs::path& path, const std::string& bytes, double h) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    fail(path, std::string("png: ") + image.message);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(path, "png: " + msg);
  }
  if (image.width < 2 || image.height < 2) fail(path, "image must be at least 2x2");
  VectorField u(Grid2D(static_cast<int>(image.width), static_cast<int>(image.height), h), channels);
  auto v = u.values();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = buf[k] / 255.0;
  return u;
}

// P5 / P6 with arbitrary whitespace and comments in the header.
VectorField decode_pnm(const fs::path& path, const std::string& bytes, double h) {
  std::size_t pos = 2;
  const auto next_token = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) fail(path, "pnm: malformed header");
    return std::stol(bytes.substr(start, pos - start));
  };
  const int channels = bytes[1] == '6' ? 3 : 1;
  const long w = next_token(), ht = next_token(), maxval = next_token();
  ++pos;  // single whitespace before raster
  if (w < 2 || ht < 2) fail(path, "image must be at least 2x2");
  if (maxval < 1 || maxval > 65535) fail(path, "pnm: maxval out of range");
  const std::size_t bps = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(ht) * channels;
  if (bytes.size() < pos + count * bps) fail(path, "pnm: truncated raster");
  VectorField u(Grid2D(static_cast<int>(w), static_cast<int>(ht), h), channels);
  auto v = u.values();
  const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned level = bps == 1 ? raster[k] : (raster[2 * k] << 8) | raster[2 * k + 1];
    v[k] = static_cast<double>(level) / static_cast<double>(maxval);
  }
  return u;
}

std::string encode_png(const fs::path& path, const VectorField& u) {
  if (u.channels() != 1 && u.channels() != 3) fail(path, "png needs 1 or 3 channels");
  std::vector<std::uint8_t> buf(u.size());
  auto v = u.values();
  for (std::size_t k = 0; k < v.size(); ++k) buf[k] = quantize8(v[k]);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(u.grid().nx);
  image.height = static_cast<png_uint_32>(u.grid().ny);
  image.format = u.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, buf.data(), 0, nullptr))
    fail(path, std::string("png: ") + image.message);
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, buf.data(), 0, nullptr))
    fail(path, std::string("png: ") + image.message);
  out.resize(size);
  return out;
}

std::string encode_pnm(const fs::path& path, const VectorField& u, int channels) {
  if (u.channels() != channels) fail(path, channels == 3 ? "ppm needs 3 channels" : "pgm needs 1 channel");
  std::string out = (channels == 3 ? "P6\n" : "P5\n") + std::to_string(u.grid().nx) + " " +
                    std::to_string(u.grid().ny) + "\n255\n";
  for (double x : u.values()) out.push_back(static_cast<char>(quantize8(x)));
  return out;
}

void put_le(std::string& out, double x) {
  auto bits = std::bit_cast<std::uint64_t>(x);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

FloatGrid decode_grid(const fs::path& path, const std::string& bytes, double h) {
  std::size_t pos = 0;
  const auto next_line = [&]() {
    const std::size_t end = bytes.find('\n', pos);
    if (end == std::string::npos) fail(path, "grid: truncated header");
    std::string line = bytes.substr(pos, end - pos);
    pos = end + 1;
    return line;
  };
  if (next_line() != kGridMagic) fail(path, "grid: bad magic");
  int nx = 0, ny = 0, channels = 0;
  {
    std::istringstream dims(next_line());
    if (!(dims >> nx >> ny >> channels) || channels < 1) fail(path, "grid: bad dimensions");
  }
  FloatGrid out;
  for (std::string line = next_line(); line != "data"; line = next_line()) {
    const auto space = line.find(' ');
    if (space == std::string::npos) fail(path, "grid: bad metadata line '" + line + "'");
    out.meta[line.substr(0, space)] = line.substr(space + 1);
  }
  const std::size_t count = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * channels;
  if (bytes.size() != pos + 8 * count) fail(path, "grid: payload size does not match header");
  std::vector<double> values(count);
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t k = 0; k < count; ++k) values[k] = get_le(raw + 8 * k);
  try {
    out.field = VectorField(Grid2D(nx, ny, h), channels, std::move(values));
  } catch (const InvalidInput& e) {
    fail(path, e.what());
  }
  return out;
}

std::string encode_grid(const VectorField& u, const std::map<std::string, std::string>& meta) {
  std::string out = std::string(kGridMagic) + "\n" + std::to_string(u.grid().nx) + " " +
                    std::to_string(u.grid().ny) + " " + std::to_string(u.channels()) + "\n";
  for (const auto& [k, v] : meta) {
    if (k.empty() || k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos ||
        k == "data")
      throw InvalidInput("grid metadata key/value not representable: " + k);
    out += k + " " + v + "\n";
  }
  out += "data\n";
  for (double x : u.values()) put_le(out, x);
  return out;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(path, "write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(path, "rename failed: " + ec.message());
}

VectorField load_image(const fs::path& path, double h) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0)
    return decode_png(path, bytes, h);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
    return decode_pnm(path, bytes, h);
  if (bytes.rfind(kGridMagic, 0) == 0) return decode_grid(path, bytes, h).field;
  fail(path, "unsupported image format");
}

void save_image(const fs::path& path, const VectorField& u) {
  const std::string ext = lower_extension(path);
  if (ext == ".png")
    write_file_atomic(path, encode_png(path, u));
  else if (ext == ".ppm")
    write_file_atomic(path, encode_pnm(path, u, 3));
  else if (ext == ".pgm")
    write_file_atomic(path, encode_pnm(path, u, 1));
  else if (ext == ".grid")
    save_float_grid(path, u);
  else
    fail(path, "unsupported output extension '" + ext + "'");
}

FloatGrid load_float_grid(const fs::path& path, double h) { return decode_grid(path, read_file(path), h); }

void save_float_grid(const fs::path& path, const VectorField& u, const std::map<std::string, std::string>& meta) {
  write_file_atomic(path, encode_grid(u, meta));
}

void save_exponent_grid(const fs::path& path, const ExponentField& p) {
  VectorField f(p.grid(), 1, std::vector<double>(p.values().begin(), p.values().end()));
  save_float_grid(path, f, {{"gap", format_double(p.gap())}, {"p_plus", format_double(p.p_plus())}});
}

ExponentField load_exponent_grid(const fs::path& path, double h) {
  FloatGrid g = load_float_grid(path, h);
  if (g.field.channels() != 1) fail(path, "exponent grid must have one channel");
  if (!g.meta.count("p_plus") || !g.meta.count("gap")) fail(path, "exponent grid lacks p_plus/gap metadata");
  auto v = g.field.values();
  return ExponentField(g.field.grid(), std::vector<double>(v.begin(), v.end()), std::stod(g.meta["p_plus"]),
                       std::stod(g.meta["gap"]));
}

VectorField render_exponent(const ExponentField& p) {
  VectorField out(p.grid(), 1);
  const double lo = p.p_minus(), hi = p.p_plus();
  auto v = out.values();
  if (hi > lo)
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = (p[k] - lo) / (hi - lo);
  return out;
}

VectorField render_mask(const CellMask& mask) {
  VectorField out(mask.grid(), 1);
  auto v = out.values();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = mask[k] ? 1.0 : 0.0;
  return out;
}

}  // namespace critflow
