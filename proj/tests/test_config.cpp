#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "critflow/config.hpp"
#include "critflow/grid.hpp"

using namespace critflow;

TEST_CASE("defaults serialize and parse back") {
  const RunManifest m;
  CHECK(parse_manifest(serialize_manifest(m)) == m);
  CHECK(serialize_manifest(m).find("dt=auto") != std::string::npos);
}

TEST_CASE("awkward doubles survive a round trip") {
  RunManifest m;
  m.input = "images/in put.png";
  m.h = 1.0 / 3.0;
  m.noise_sigma = 0.1 + 0.2;
  m.seed = 18446744073709551615ull;
  m.eps = 5e-324;
  m.T = 1e300;
  m.dt = 2.0 / 7.0;
  m.tau = 1e-17;
  m.scheme = "prox";
  m.exponent_mode = "constant";
  m.max_inner = 7;
  const RunManifest back = parse_manifest(serialize_manifest(m));
  CHECK(back == m);
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "critflow_manifest_test.ini";
  RunManifest m;
  m.fidelity = "linear_tether";
  m.lambda = 0.25;
  save_manifest(path, m);
  CHECK(load_manifest(path) == m);
  std::filesystem::remove(path);
}

TEST_CASE("parse rejects malformed manifests") {
  CHECK_THROWS_AS(parse_manifest("[flow]\nbogus = 1\n"), InvalidInput);
  CHECK_THROWS_AS(parse_manifest("[nosuch]\neps = 1\n"), InvalidInput);
  CHECK_THROWS_AS(parse_manifest("eps = 1\n"), InvalidInput);
  CHECK_THROWS_AS(parse_manifest("[flow]\neps = abc\n"), InvalidInput);
  CHECK_THROWS_AS(parse_manifest("[flow]\neps = -1\n"), InvalidInput);
  CHECK_THROWS_AS(parse_manifest("[flow]\nscheme = implicit\n"), InvalidInput);
  // missing keys keep their defaults, auto clears optionals
  const RunManifest m = parse_manifest("[flow]\nT = 0.5\ndt = auto\n[prox]\ntau = 0.01\n");
  CHECK(m.T == 0.5);
  CHECK_FALSE(m.dt.has_value());
  CHECK(m.tau == 0.01);
  CHECK(m.eps == RunManifest{}.eps);
}
