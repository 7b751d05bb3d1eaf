#include "critflow/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

#include "critflow/grid.hpp"
#include "critflow/image_io.hpp"

namespace critflow {

namespace pt = boost::property_tree;

namespace {

constexpr const char* kAuto = "auto";

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  const auto used = static_cast<std::size_t>(end - v.c_str());
  if (used == 0 || used != v.size() || std::isspace(static_cast<unsigned char>(v.front()))) throw InvalidInput("manifest: " + key + " is not a number: '" + v + "'");
  return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  std::uint64_t x = 0;
  try {
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || v.front() == '-')
    throw InvalidInput("manifest: " + key + " is not a non-negative integer: '" + v + "'");
  return x;
}

// Visits every manifest field with its ini key; `bind` is called with
// (key, field reference) for each and dispatches on the field type.
template <typename M, typename F>
void for_each_field(M& m, F&& bind) {
  bind("io.input", m.input);
  bind("io.output_dir", m.output_dir);
  bind("io.h", m.h);
  bind("noise.sigma", m.noise_sigma);
  bind("noise.seed", m.seed);
  bind("exponent.mode", m.exponent_mode);
  bind("exponent.p_max", m.p_max);
  bind("exponent.eta", m.eta);
  bind("exponent.k", m.k);
  bind("exponent.gauss_sigma", m.gauss_sigma);
  bind("flow.scheme", m.scheme);
  bind("flow.eps", m.eps);
  bind("flow.delta", m.delta);
  bind("flow.T", m.T);
  bind("flow.dt", m.dt);
  bind("prox.tau", m.tau);
  bind("prox.eps_inner", m.eps_inner);
  bind("prox.tol", m.tol);
  bind("prox.max_inner", m.max_inner);
  bind("fidelity.kind", m.fidelity);
  bind("fidelity.lambda", m.lambda);
  bind("version.critflow", m.version);
}

struct Writer {
  pt::ptree& tree;
  void operator()(const char* key, const std::string& v) { tree.put(key, v); }
  void operator()(const char* key, double v) { tree.put(key, format_double(v)); }
  void operator()(const char* key, std::uint64_t v) { tree.put(key, std::to_string(v)); }
  void operator()(const char* key, const std::optional<double>& v) {
    tree.put(key, v ? format_double(*v) : std::string(kAuto));
  }
};

struct Reader {
  const pt::ptree& tree;
  std::set<std::string>& seen;
  std::optional<std::string> get(const char* key) {
    seen.insert(key);
    if (auto v = tree.get_optional<std::string>(key)) return *v;
    return std::nullopt;
  }
  void operator()(const char* key, std::string& out) {
    if (auto v = get(key)) out = *v;
  }
  void operator()(const char* key, double& out) {
    if (auto v = get(key)) out = to_double(key, *v);
  }
  void operator()(const char* key, std::uint64_t& out) {
    if (auto v = get(key)) out = to_uint(key, *v);
  }
  void operator()(const char* key, std::optional<double>& out) {
    if (auto v = get(key)) {
      if (*v == kAuto)
        out.reset();
      else
        out = to_double(key, *v);
    }
  }
};

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void RunManifest::validate() const {
  if (exponent_mode != "edge_adaptive" && exponent_mode != "constant")
    throw InvalidInput("manifest: exponent.mode must be edge_adaptive or constant");
  if (scheme != "explicit" && scheme != "prox") throw InvalidInput("manifest: flow.scheme must be explicit or prox");
  if (fidelity != "none" && fidelity != "linear_tether")
    throw InvalidInput("manifest: fidelity.kind must be none or linear_tether");
  if (!(h > 0.0)) throw InvalidInput("manifest: io.h must be positive");
  if (!(noise_sigma >= 0.0)) throw InvalidInput("manifest: noise.sigma must be >= 0");
  if (!(eps > 0.0)) throw InvalidInput("manifest: flow.eps must be positive");
  if (!(delta >= 0.0)) throw InvalidInput("manifest: flow.delta must be >= 0");
  if (!(T >= 0.0)) throw InvalidInput("manifest: flow.T must be >= 0");
  if (dt && !(*dt > 0.0)) throw InvalidInput("manifest: flow.dt must be positive");
  if (tau && !(*tau > 0.0)) throw InvalidInput("manifest: prox.tau must be positive");
  if (!(eps_inner > 0.0) || !(tol > 0.0)) throw InvalidInput("manifest: prox.eps_inner and prox.tol must be positive");
  if (!(lambda >= 0.0)) throw InvalidInput("manifest: fidelity.lambda must be >= 0");
  if (scheme == "prox" && fidelity != "none" && lambda > 0.0)
    throw InvalidInput("manifest: the prox scheme supports no fidelity term");
}

std::string serialize_manifest(const RunManifest& m) {
  pt::ptree tree;
  for_each_field(m, Writer{tree});
  std::ostringstream out;
  pt::write_ini(out, tree);
  return out.str();
}

RunManifest parse_manifest(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidInput(std::string("manifest: ") + e.what());
  }
  RunManifest m;
  std::set<std::string> known;
  for_each_field(m, Reader{tree, known});
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw InvalidInput("manifest: key outside a section: " + section);
    for (const auto& [key, value] : body)
      if (!known.count(section + "." + key)) throw InvalidInput("manifest: unknown key " + section + "." + key);
  }
  m.validate();
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  try {
    return parse_manifest(read_file(path));
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

void save_manifest(const std::filesystem::path& path, const RunManifest& m) {
  write_file_atomic(path, serialize_manifest(m));
}

}  // namespace critflow
