#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rtd/driver.hpp"
#include "rtd/oracles.hpp"

using namespace rtd;

namespace {

struct Common {
  std::string config, engine, warm_start, out;
};

void add_common(CLI::App* app, Common& c, bool with_out = true) {
  app->add_option("--config", c.config, "run configuration (JSON, or a manifest.json)")->check(CLI::ExistingFile);
  app->add_option("--engine", c.engine, "density engine")->check(CLI::IsMember({"direct", "oma", "reference"}));
  app->add_option("--warm-start", c.warm_start, "artifact directory whose potential.tsv seeds the run")
      ->check(CLI::ExistingDirectory);
  if (with_out) app->add_option("--out", c.out, "output directory (default: config output)");
}

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : ingest_config(c.config);
  if (!c.engine.empty()) cfg.engine = engine_from_string(c.engine);
  if (!c.out.empty()) cfg.output = c.out;
  cfg.validate();
  return cfg;
}

void print_row(const ResonanceRow& r) {
  std::printf("bias %.4g eV  gummel %d  E_0 %.4f meV  E_I %.4f meV  Gamma/E %.4e  newton %d\n", r.bias,
              r.gummel_iterations, r.dirichlet_energy * 1e3, r.energy * 1e3, r.width / r.energy,
              r.newton_iterations);
}

int stationary(const Common& c, std::optional<double> bias) {
  const RunConfig cfg = load(c);
  StationaryRequest req;
  req.bias = bias.value_or(cfg.bias.initial);
  RealField warm;
  if (!c.warm_start.empty()) {
    warm = load_potential(c.warm_start);
    req.warm_start = &warm;
  }
  try {
    const StationaryArtifacts a = run_stationary(cfg, req);
    emit_artifacts(a, cfg.output);
    print_row(a.row);
    std::printf("engine %s  frequency points %d  solves %lld  wall %.2f s%s\n", to_string(cfg.engine).c_str(),
                a.frequency_points, a.schrodinger_solves, a.wall_seconds, a.from_cache ? "  (cached)" : "");
    return 0;
  } catch (const GummelDivergence& e) {
    StationaryArtifacts a;
    a.config = cfg;
    a.bias = req.bias;
    a.grid = cfg.device_setup().grid;
    a.potential = e.state().potential;
    a.density = e.state().density;
    a.trace = e.state().errors;
    emit_artifacts(a, cfg.output);
    std::fprintf(stderr, "error: %s (trace written to %s)\n", e.what(), cfg.output.c_str());
    return 2;
  }
}

int transient(const Common& c, std::optional<int> snapshots, bool progress) {
  RunConfig cfg = load(c);
  if (snapshots) cfg.transient.snapshots = *snapshots;
  cfg.validate();
  RealField warm;
  if (!c.warm_start.empty()) warm = load_potential(c.warm_start);
  auto report = [](const TransientRecord& r) {
    std::fprintf(stderr, "t %8.1f fs  charge %.6e  d %.3f %%\n", r.t, r.charge, r.distance);
  };
  const TransientArtifacts a = run_transient(cfg, warm.empty() ? nullptr : &warm,
                                             progress ? std::function<void(const TransientRecord&)>(report) : nullptr);
  emit_artifacts(a, cfg.output);
  const auto& last = a.series.back();
  std::printf("engine %s  steps %d  solves %lld (%lld per step)  wall %.2f s\n", to_string(cfg.engine).c_str(),
              cfg.steps(), a.schrodinger_solves, a.solves_per_step, a.wall_seconds);
  std::printf("final charge %.6e  d %.3f %%  n0 vs stationary %.3f %%\n", last.charge, last.distance,
              a.initial_density_distance);
  return 0;
}

int resonance(const Common& c, std::optional<double> bias) {
  const RunConfig cfg = load(c);
  const DeviceSetup dev = cfg.device_setup();
  const double b = bias.value_or(cfg.bias.initial);
  const RealField v = c.warm_start.empty() ? RealField(dev.grid.nodes(), 0.0) : load_potential(c.warm_start);
  if (static_cast<int>(v.size()) != dev.grid.nodes()) throw ConfigError("potential does not match the grid");
  const RealField q = dev.total_potential(v, b);
  const Resonance r = first_resonance(dev.params, dev.grid, q, dev.geom.a2, dev.geom.b2);
  print_row(resonance_row(dev, v, b, 0));
  for (std::size_t n = 0; n < r.residuals.size(); ++n) std::printf("  newton %zu  residual %.3e\n", n, r.residuals[n]);
  return 0;
}

int chi_check(int cases, std::uint64_t seed, double tol) {
  const ChiSweep s = chi_sweep(cases, seed, tol);
  std::printf("cases %d  max error chi0 %.3e  chi1 %.3e  failures %d\n", s.cases, s.max_error0, s.max_error1,
              s.failures);
  return s.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D Schrodinger-Poisson simulator of a resonant tunneling diode"};
  app.require_subcommand(1);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "print the default configuration and exit");

  Common sc;
  std::optional<double> s_bias;
  auto* st = app.add_subcommand("stationary", "Gummel loop at a fixed bias");
  add_common(st, sc);
  st->add_option("--bias", s_bias, "bias in eV (default: bias.initial)");

  Common tc;
  std::optional<int> snapshots;
  bool progress = false;
  auto* tr = app.add_subcommand("transient", "self-consistent time evolution");
  add_common(tr, tc);
  tr->add_option("--snapshots", snapshots, "k-scans evenly spaced over the run")->check(CLI::NonNegativeNumber);
  tr->add_flag("--progress", progress, "print the time series while running");

  Common rc;
  std::optional<double> r_bias;
  auto* re = app.add_subcommand("resonance", "first resonance of a given potential");
  add_common(re, rc, false);
  re->add_option("--bias", r_bias, "bias in eV (default: bias.initial)");

  int cases = 1000;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  auto* ch = app.add_subcommand("chi-check", "closed-form chi integrals against adaptive quadrature");
  ch->add_option("--cases", cases, "random parameter tuples")->check(CLI::PositiveNumber);
  ch->add_option("--seed", seed, "random seed");
  ch->add_option("--tolerance", tol, "relative error threshold");

  app.require_subcommand(0, 1);
  CLI11_PARSE(app, argc, argv);
  if (print_config) {
    std::cout << to_json(RunConfig{}).dump(2) << "\n";
    return 0;
  }
  try {
    if (*st) return stationary(sc, s_bias);
    if (*tr) return transient(tc, snapshots, progress);
    if (*re) return resonance(rc, r_bias);
    if (*ch) return chi_check(cases, seed, tol);
    std::cerr << app.help();
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
