#include "movcut/study.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace {

// "a..b" or "a,b,c"
std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int a = std::stoi(text.substr(0, dots));
    const int b = std::stoi(text.substr(dots + 2));
    if (b < a) throw movcut::Error("empty level range '" + text + "'");
    for (int l = a; l <= b; ++l) out.push_back(l);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  if (out.empty()) throw movcut::Error("empty level list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eulerian unfitted FEM for a rigid body falling through a heat-equation fluid"};
  app.require_subcommand(1);

  auto* study = app.add_subcommand("study", "Run a space-time convergence study");
  std::string scheme = "bdf1", bc = "lagrange", lx = "0..3", lt = "0..4", out, reference = "self", cache;
  int k = 2, reference_lx = -1, ale_degree = 4, ale_n_circle = 128;
  double gamma_s = 0.1, gamma_lambda = 0.01, tend = 1.0, h0 = 0.1, dt0 = 1.0 / 50.0;
  std::optional<double> c_delta;
  bool full_grid = false;
  study->add_option("--scheme", scheme, "bdf1 or bdf2")->check(CLI::IsMember({"bdf1", "bdf2"}));
  study->add_option("--bc", bc, "lagrange or nitsche")->check(CLI::IsMember({"lagrange", "nitsche"}));
  study->add_option("--k", k, "velocity polynomial degree");
  study->add_option("--lx", lx, "space levels, e.g. 0..3 or 0,2");
  study->add_option("--lt", lt, "time levels, e.g. 0..4");
  study->add_option("--gamma-s", gamma_s, "ghost-penalty coefficient");
  study->add_option("--gamma-lambda", gamma_lambda, "multiplier stabilisation coefficient");
  study->add_option("--c-delta", c_delta, "extension strip factor (default 2 for bdf1, 4 for bdf2)");
  study->add_option("--tend", tend, "final time");
  study->add_option("--h0", h0, "mesh size at Lx = 0");
  study->add_option("--dt0", dt0, "time step at Lt = 0");
  study->add_option("--out", out, "output directory")->required();
  study->add_option("--reference", reference, "ale or self")->check(CLI::IsMember({"ale", "self"}));
  study->add_option("--reference-lx", reference_lx, "space level of the self reference (default: finest)");
  study->add_option("--ale-degree", ale_degree, "polynomial degree of the ALE reference");
  study->add_option("--ale-n-circle", ale_n_circle, "circle segments of the ALE reference mesh");
  study->add_option("--cache", cache, "trajectory cache directory");
  study->add_flag("--full-grid", full_grid, "rates on every row instead of the two slices");

  CLI11_PARSE(app, argc, argv);

  try {
    movcut::StudyConfig config;
    config.h0 = h0;
    config.dt0 = dt0;
    config.lx = parse_levels(lx);
    config.lt = parse_levels(lt);
    config.scheme.k = k;
    config.scheme.scheme = movcut::parse_time_scheme(scheme);
    config.scheme.bc = movcut::parse_boundary_method(bc);
    config.scheme.gamma_s = gamma_s;
    config.scheme.gamma_lambda = gamma_lambda;
    config.scheme.c_delta_h = c_delta.value_or(movcut::SchemeConfig::default_c_delta(config.scheme.scheme));
    config.scheme.t_end = tend;
    config.out_dir = out;
    config.cache_dir = cache;
    config.reference = movcut::parse_reference_mode(reference);
    config.reference_lx = reference_lx;
    config.ale_degree = ale_degree;
    config.ale_n_circle = ale_n_circle;
    config.full_grid_rates = full_grid;

    const movcut::StudyResult result = movcut::run_study(config, &std::cerr);
    movcut::write_errors_csv(std::cout, result.rows);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
