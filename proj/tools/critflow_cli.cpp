// critflow: denoise, exponent-map, verify and trace-compare subcommands.

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "critflow/commands.hpp"
#include "critflow/config.hpp"

using namespace critflow;

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::string> input, output_dir, scheme, exponent_mode, fidelity;
  std::optional<std::uint64_t> seed, max_inner;
  std::optional<double> sigma, eps, delta, tau, T, dt, p_max, eta, k, gauss_sigma, h, eps_inner, tol, lambda;

  RunManifest resolve() const {
    RunManifest m = config.empty() ? RunManifest{} : load_manifest(config);
    const auto set = [](auto& field, const auto& flag) {
      if (flag) field = *flag;
    };
    set(m.input, input);
    set(m.output_dir, output_dir);
    set(m.scheme, scheme);
    set(m.exponent_mode, exponent_mode);
    set(m.fidelity, fidelity);
    set(m.seed, seed);
    set(m.max_inner, max_inner);
    set(m.noise_sigma, sigma);
    set(m.eps, eps);
    set(m.delta, delta);
    if (tau) m.tau = *tau;
    set(m.T, T);
    if (dt) m.dt = *dt;
    set(m.p_max, p_max);
    set(m.eta, eta);
    set(m.k, k);
    set(m.gauss_sigma, gauss_sigma);
    set(m.h, h);
    set(m.eps_inner, eps_inner);
    set(m.tol, tol);
    set(m.lambda, lambda);
    return m;
  }
};

void add_image_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "manifest file; flags override its values")->check(CLI::ExistingFile);
  cmd->add_option("--input", f.input, "PNG, PPM/PGM or float-grid image");
  cmd->add_option("--output-dir", f.output_dir, "directory for the artifacts");
  cmd->add_option("--spacing", f.h, "grid spacing h");
  cmd->add_option("--exponent", f.exponent_mode, "edge_adaptive or constant (p = p-max)")
      ->check(CLI::IsMember({"edge_adaptive", "constant"}));
  cmd->add_option("--p-max", f.p_max, "largest exponent");
  cmd->add_option("--eta", f.eta, "exponent gap: values in {1} U [1+eta, p-max]");
  cmd->add_option("--k", f.k, "edge sensitivity of the adaptive exponent");
  cmd->add_option("--gauss-sigma", f.gauss_sigma, "pre-smoothing for the adaptive exponent, in cells");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critflow: variable-exponent diffusion for vector-valued images"};
  app.require_subcommand(1);

  RunFlags denoise_flags;
  auto* denoise = app.add_subcommand("denoise", "restore an image with the explicit or proximal scheme");
  add_image_flags(denoise, denoise_flags);
  denoise->add_option("--scheme", denoise_flags.scheme, "explicit or prox")
      ->check(CLI::IsMember({"explicit", "prox"}));
  denoise->add_option("--seed", denoise_flags.seed, "noise seed");
  denoise->add_option("--sigma", denoise_flags.sigma, "synthetic Gaussian noise level in [0, 1] units");
  denoise->add_option("--eps", denoise_flags.eps, "flux regularization");
  denoise->add_option("--delta", denoise_flags.delta, "Laplacian stabilizer weight");
  denoise->add_option("--tau", denoise_flags.tau, "proximal step (default h)");
  denoise->add_option("--T", denoise_flags.T, "final time");
  denoise->add_option("--dt", denoise_flags.dt, "explicit step (default: stability bound)");
  denoise->add_option("--eps-inner", denoise_flags.eps_inner, "smoothing of the proximal energy");
  denoise->add_option("--tol", denoise_flags.tol, "inner solver tolerance");
  denoise->add_option("--max-inner", denoise_flags.max_inner, "inner solver iteration cap");
  denoise->add_option("--fidelity", denoise_flags.fidelity, "none or linear_tether")
      ->check(CLI::IsMember({"none", "linear_tether"}));
  denoise->add_option("--lambda", denoise_flags.lambda, "tether strength towards the noisy image");

  RunFlags map_flags;
  auto* exponent_map = app.add_subcommand("exponent-map", "write the exponent field and its critical set");
  add_image_flags(exponent_map, map_flags);

  VerifyOptions verify_opts;
  std::optional<std::string> only;
  auto* verify = app.add_subcommand("verify", "run the acceptance checks");
  verify->add_option("--only", only, "run checks whose name contains this text");
  verify->add_flag("--flip-divergence-sign", verify_opts.flip_divergence_sign, "mutation canary")
      ->group("");

  std::string trace_a, trace_b;
  double trace_tol = 0.0;
  auto* compare = app.add_subcommand("trace-compare", "compare two energy CSV traces");
  compare->add_option("a", trace_a)->required()->check(CLI::ExistingFile);
  compare->add_option("b", trace_b)->required()->check(CLI::ExistingFile);
  compare->add_option("--tol", trace_tol, "largest accepted absolute difference");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*denoise) {
      const DenoiseReport rep = cmd_denoise(denoise_flags.resolve(), std::cout);
      return rep.inner_warning ? 3 : 0;
    }
    if (*exponent_map) {
      cmd_exponent_map(map_flags.resolve(), std::cout);
      return 0;
    }
    if (*verify) {
      verify_opts.only = only;
      return cmd_verify(verify_opts, std::cout);
    }
    if (*compare) return cmd_trace_compare(trace_a, trace_b, trace_tol, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "critflow: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
