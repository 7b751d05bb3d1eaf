#include "critflow/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "critflow/acceptance.hpp"
#include "critflow/exponent.hpp"
#include "critflow/flow.hpp"
#include "critflow/functionals.hpp"
#include "critflow/image_io.hpp"
#include "critflow/proximal.hpp"

namespace critflow {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCsvHeader = "step,time,y_part,off_y_part,total,smoothed_total";

void csv_row(std::string& out, std::size_t step, double time, const EnergyBreakdown& psi, double smoothed) {
  out += std::to_string(step) + "," + format_double(time) + "," + format_double(psi.y_part) + "," +
         format_double(psi.off_y_part) + "," + format_double(psi.total()) + "," + format_double(smoothed) + "\n";
}

ExponentField build_exponent(const RunManifest& m, const VectorField& u) {
  if (m.exponent_mode == "constant") return ExponentField::constant(u.grid(), m.p_max, m.eta);
  return edge_adaptive_exponent(u, m.gauss_sigma, m.k, m.p_max, m.eta);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, sep);) out.push_back(cell);
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(line);
  return lines;
}

}  // namespace

double psnr(const VectorField& a, const VectorField& b) {
  if (!a.same_shape(b)) throw InvalidInput("psnr: shape mismatch");
  double se = 0.0;
  auto x = a.values();
  auto y = b.values();
  for (std::size_t k = 0; k < x.size(); ++k) se += (x[k] - y[k]) * (x[k] - y[k]);
  const double mse = se / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

VectorField add_gaussian_noise(const VectorField& u, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidInput("noise sigma must be >= 0");
  VectorField out = u;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& v : out.values()) v += normal(rng);
  return out;
}

DenoiseReport cmd_denoise(const RunManifest& m, std::ostream& out) {
  m.validate();
  if (m.input.empty()) throw InvalidInput("denoise: no input image");
  const fs::path dir = m.output_dir;
  fs::create_directories(dir);

  const VectorField clean = load_image(m.input, m.h);
  const VectorField noisy = add_gaussian_noise(clean, m.noise_sigma, m.seed);
  const ExponentField p = build_exponent(m, noisy);

  DenoiseReport rep;
  rep.resolved = m;
  VectorField restored;
  std::string csv = std::string(kCsvHeader) + "\n";

  if (m.scheme == "explicit") {
    FlowConfig cfg;
    cfg.u0 = noisy;
    cfg.schedule = ExponentSchedule::constant(p);
    cfg.eps = m.eps;
    cfg.delta = m.delta;
    cfg.T = m.T;
    cfg.dt = m.dt;
    if (m.fidelity == "linear_tether") cfg.fidelity = FidelitySpec::tether(m.lambda, noisy);
    cfg.trace_every = std::numeric_limits<std::size_t>::max();
    cfg.trajectory_stride = std::numeric_limits<std::size_t>::max();
    FlowResult r = run_flow(cfg);
    for (const EnergyRecord& e : r.energy_trace) csv_row(csv, e.step, e.time, e.psi, e.smoothed);
    rep.steps = r.diagnostics.steps;
    rep.step_size = r.diagnostics.dt;
    if (!m.dt) rep.resolved.dt = r.diagnostics.dt;
    restored = std::move(r.final_state);
  } else {
    ProxConfig cfg;
    cfg.u0 = noisy;
    cfg.p = p;
    const double tau_max = m.tau ? *m.tau : m.h;
    cfg.steps = m.T == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(m.T / tau_max - 1e-9));
    cfg.tau = cfg.steps == 0 ? tau_max : m.T / static_cast<double>(cfg.steps);
    cfg.eps_inner = m.eps_inner;
    cfg.tol = m.tol;
    cfg.max_inner = m.max_inner;
    SemigroupResult r = run_semigroup(cfg);
    for (std::size_t k = 0; k < r.trajectory.size(); ++k)
      csv_row(csv, k, r.trajectory.time(k), psi_energy(r.trajectory[k], p), r.energies[k]);
    rep.steps = cfg.steps;
    rep.step_size = *cfg.tau;
    rep.inner_warning = r.warning;
    if (r.warning) out << "warning: an inner proximal solve stopped before reaching tol\n";
    rep.resolved.tau = cfg.tau;
    restored = r.trajectory.back();
  }

  rep.psnr_noisy = psnr(noisy, clean);
  rep.psnr_restored = psnr(restored, clean);

  save_image(dir / "restored.png", restored);
  save_float_grid(dir / "restored.grid", restored);
  save_image(dir / "noisy.png", noisy);
  save_float_grid(dir / "noisy.grid", noisy);
  save_exponent_grid(dir / "exponent.grid", p);
  write_file_atomic(dir / "energy.csv", csv);
  save_manifest(dir / "manifest.ini", rep.resolved);

  out << "scheme " << m.scheme << ", " << rep.steps << " steps of " << format_double(rep.step_size) << "\n";
  out << "psnr noisy " << rep.psnr_noisy << " dB, restored " << rep.psnr_restored << " dB\n";
  return rep;
}

ExponentMapReport cmd_exponent_map(const RunManifest& m, std::ostream& out) {
  m.validate();
  if (m.input.empty()) throw InvalidInput("exponent-map: no input image");
  const fs::path dir = m.output_dir;
  fs::create_directories(dir);
  const VectorField u = load_image(m.input, m.h);
  const ExponentField p = build_exponent(m, u);
  const CellMask y = critical_mask(p);

  ExponentMapReport rep{p.p_minus(), p.p_plus(), y.count()};
  save_exponent_grid(dir / "exponent.grid", p);
  save_image(dir / "exponent.png", render_exponent(p));
  save_image(dir / "critical_mask.png", render_mask(y));
  write_file_atomic(dir / "exponent_summary.txt", "p_minus " + format_double(rep.p_minus) + "\np_plus " +
                                                      format_double(rep.p_plus) + "\ncritical_cells " +
                                                      std::to_string(rep.critical_cells) + "\n");
  out << "p_minus " << rep.p_minus << ", p_plus " << rep.p_plus << ", " << rep.critical_cells
      << " critical cells\n";
  return rep;
}

int cmd_verify(const VerifyOptions& options, std::ostream& out) {
  AcceptanceHooks hooks;
  hooks.flip_divergence_sign = options.flip_divergence_sign;
  bool all = true;
  for (const AcceptanceCheck& check : acceptance_checks()) {
    if (options.only && check.name.find(*options.only) == std::string::npos) continue;
    const CheckResult r = run_check(check, hooks);
    out << format_check(r) << "\n" << std::flush;
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

int cmd_trace_compare(const fs::path& a, const fs::path& b, double tol, std::ostream& out) {
  const auto la = read_lines(a);
  const auto lb = read_lines(b);
  if (la.empty() || lb.empty() || la.front() != lb.front()) {
    out << "headers differ\n";
    return 1;
  }
  if (la.size() != lb.size()) {
    out << "row counts differ: " << la.size() - 1 << " vs " << lb.size() - 1 << "\n";
    return 1;
  }
  double worst = 0.0;
  std::size_t worst_row = 0;
  for (std::size_t r = 1; r < la.size(); ++r) {
    const auto ca = split(la[r], ',');
    const auto cb = split(lb[r], ',');
    if (ca.size() != cb.size()) {
      out << "column counts differ on row " << r << "\n";
      return 1;
    }
    for (std::size_t c = 0; c < ca.size(); ++c) {
      const double d = std::abs(std::stod(ca[c]) - std::stod(cb[c]));
      if (!(d <= worst) && !(d == 0.0)) {
        worst = std::isnan(d) ? std::numeric_limits<double>::infinity() : d;
        worst_row = r;
      }
    }
  }
  out << "max abs difference " << format_double(worst) << " (row " << worst_row << "), tol " << format_double(tol)
      << "\n";
  return worst <= tol ? 0 : 1;
}

}  // namespace critflow
