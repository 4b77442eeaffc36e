#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rtd/cn_dtbc.hpp"
#include "rtd/driver.hpp"
#include "rtd/oma_transient.hpp"
#include "rtd/oracles.hpp"
#include "rtd/resonance.hpp"

using namespace rtd;

namespace {

int failures = 0;

void verdict(const char* id, bool ok, const char* fmt, ...) {
  if (!ok) ++failures;
  char buf[1024];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  std::printf("%-3s %s  %s\n", id, ok ? "PASS" : "FAIL", buf);
  std::fflush(stdout);
}

void note(const char* fmt, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  std::printf("       %s\n", buf);
  std::fflush(stdout);
}

double meV(double e) { return 1e3 * e; }

bool within(double x, double ref, double tol) { return std::abs(x - ref) <= tol; }

// ---------------------------------------------------------------------------

bool table_ok(const ResonanceRow& r0, const ResonanceRow& r1) {
  return within(meV(r0.dirichlet_energy), 126.83, 1.0) && within(meV(r0.energy), 127.55, 1.0) &&
         within(r0.width / r0.energy, 2.58e-3, 0.258e-3) && r0.newton_iterations <= 5 &&
         within(meV(r1.energy), 81.00, 1.0) && within(r1.width / r1.energy, 4.40e-3, 0.44e-3) &&
         r1.newton_iterations <= 5;
}

void print_rows(const ResonanceRow& r0, const ResonanceRow& r1) {
  note("B 0    E_0 %.2f meV  E_I %.2f meV  Gamma/E %.3e  newton %d", meV(r0.dirichlet_energy), meV(r0.energy),
       r0.width / r0.energy, r0.newton_iterations);
  note("B 0.1  E_0 %.2f meV  E_I %.2f meV  Gamma/E %.3e  newton %d", meV(r1.dirichlet_energy), meV(r1.energy),
       r1.width / r1.energy, r1.newton_iterations);
}

void resonance_table() {
  RunConfig c;
  c.engine = Engine::Reference;
  c.mesh.J = 300;
  StationaryRequest req;
  const ResonanceRow a0 = run_stationary(c, req).row;
  req.bias = 0.1;
  const ResonanceRow a1 = run_stationary(c, req).row;
  verdict("1", table_ok(a0, a1), "resonance table, J = 300 intervals, reference engine");
  print_rows(a0, a1);
  c.mesh.J = 299;
  req.bias = 0.0;
  const ResonanceRow b0 = run_stationary(c, req).row;
  req.bias = 0.1;
  const ResonanceRow b1 = run_stationary(c, req).row;
  note("J = 299 intervals (300 grid points): %s", table_ok(b0, b1) ? "within tolerance" : "outside tolerance");
  print_rows(b0, b1);
}

// ---------------------------------------------------------------------------

void chi_oracle() {
  const ChiSweep s = chi_sweep(2000, 1, 1e-10);
  verdict("2", s.failures == 0 && s.cases >= 1000, "chi closed forms vs quadrature, %d cases, max error %.2e / %.2e",
          s.cases, s.max_error0, s.max_error1);
}

// ---------------------------------------------------------------------------

void stationary_oma() {
  RunConfig ref_cfg;
  ref_cfg.engine = Engine::Reference;
  RunConfig oma_cfg;
  bool ok = true;
  for (double b : {0.0, 0.1}) {
    StationaryRequest req;
    req.bias = b;
    const StationaryArtifacts ref = run_stationary(ref_cfg, req);
    const StationaryArtifacts oma = run_stationary(oma_cfg, req);
    const double err = 100.0 * relative_l2(oma.potential, ref.potential);
    const int target = b == 0.0 ? 37 : 34;
    const double limit = b == 0.0 ? 3.0 : 4.0;
    const bool intervals = oma.frequency_points == oma_cfg.mesh.P_stationary + 1;
    const bool pass = err <= limit && std::abs(oma.row.gummel_iterations - target) <= 10 && intervals;
    ok = ok && pass;
    note("B %.1f  L2 error %.2f %% (limit %.0f)  gummel %d (target %d +- 10)  mesh %d intervals, %d nodes%s", b, err,
         limit, oma.row.gummel_iterations, target, oma.frequency_points - 1, oma.frequency_points,
         oma.continued_from_zero_bias ? "  continued from B = 0" : "");
  }
  verdict("3", ok, "stationary OMA, P = 50, vs P = 4000 reference");
}

// ---------------------------------------------------------------------------

struct DtbcBench {
  PhysicalParams params;
  SpatialGrid grid{299, 135.0};
  CnScheme sc = make_scheme(params, grid, 1.0);

  double distance(std::span<const cplx> a, std::span<const cplx> b) const {
    ComplexField d(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) d[j] = a[j] - b[j];
    return discrete_norm(d, grid.dx()) / discrete_norm(b, grid.dx());
  }

  // stationary solution of the three-point scheme with a discrete outgoing wave
  ComplexField discrete_state(std::span<const double> q, double E, bool from_left) const {
    const int J = grid.J;
    const double g = sc.gamma * sc.dx * sc.dx;
    ComplexField phi(J + 1);
    const int end = from_left ? J : 0;
    const int dir = from_left ? -1 : 1;
    cplx outer = std::polar(1.0, std::acos(1.0 - 0.5 * g * (E - q[end]))), cur = 1.0;
    phi[end] = cur;
    for (int j = end; j != J - end; j += dir) {
      const cplx next = (2.0 - g * (E - q[j])) * cur - outer;
      phi[j + dir] = next;
      outer = cur;
      cur = next;
    }
    return phi;
  }

  double invariance(std::span<const cplx> phi, std::span<const double> q, double E, int steps) const {
    const DtbcKernel kl = build_kernel(sc.sigma(q.front()), sc.R(), steps);
    const DtbcKernel kr = build_kernel(sc.sigma(q.back()), sc.R(), steps);
    const CnStepOperator op(sc, q, kl.s[0], kr.s[0]);
    CnEvolution ev(ComplexField(phi.begin(), phi.end()), BoundaryMode::NonHomogeneous,
                   make_nonhomogeneous(phi, E, E, sc, PhaseRule::Cayley));
    const cplx rho = step_phase(E, sc, PhaseRule::Cayley);
    cplx phase = 1.0;
    double worst = 0.0;
    ComplexField ref(phi.size());
    for (int l = 1; l <= steps; ++l) {
      ev.step(sc, op, kl, kr);
      phase *= rho;
      for (std::size_t j = 0; j < phi.size(); ++j) ref[j] = phi[j] * phase;
      worst = std::max(worst, distance(ev.psi(), ref));
    }
    return worst;
  }

  double gauge_gap(double QL, int steps) const {
    const RealField q = external_potential(DeviceGeometry{}, grid, -QL);
    const WaveField w = solve_scattering(params, grid, 0.3, q, -QL);
    const DtbcKernel kl = build_kernel(0.0, sc.R(), steps);
    const DtbcKernel kr = build_kernel(sc.sigma(QL), sc.R(), steps);
    const CnStepOperator op2(sc, q, kl.s[0], kr.s[0]);
    const CnStepOperator op3(sc, q, kl.s[0], kl.s[0]);
    CnEvolution a(w.values, BoundaryMode::NonHomogeneous,
                  make_nonhomogeneous(w.values, w.energy, w.energy, sc, PhaseRule::Exact));
    CnEvolution b(w.values, BoundaryMode::TimeDependent,
                  make_nonhomogeneous(w.values, w.energy, w.energy - QL, sc, PhaseRule::Exact));
    GaugePhase gauge(QL);
    double worst = 0.0;
    for (int l = 0; l < steps; ++l) {
      a.step(sc, op2, kl, kr);
      b.step(sc, op3, kl, kl, gauge.advance(QL, sc));
      worst = std::max(worst, distance(b.psi(), a.psi()));
    }
    return worst;
  }
};

void dtbc_properties() {
  const DtbcBench d;
  const int J = d.grid.J;

  ComplexField psi(d.grid.nodes());
  for (int j = 0; j <= J; ++j) {
    const double x = d.grid.x(j) - 0.5 * d.grid.L;
    psi[j] = std::exp(-x * x / 200.0) * std::polar(1.0, 0.5 * d.grid.x(j));
  }
  const int steps = 2000;
  const DtbcKernel k0 = build_kernel(0.0, d.sc.R(), steps);
  const CnStepOperator free_op(d.sc, RealField(d.grid.nodes(), 0.0), k0.s[0], k0.s[0]);
  CnEvolution ev(psi, BoundaryMode::Homogeneous);
  const double n0 = discrete_norm(psi, d.grid.dx());
  double prev = n0;
  int increases = 0;
  for (int l = 1; l <= steps; ++l) {
    ev.step(d.sc, free_op, k0, k0);
    const double n = discrete_norm(ev.psi(), d.grid.dx());
    if (n > prev * (1.0 + 1e-13)) ++increases;
    prev = n;
  }
  verdict("4a", prev < 1e-4 * n0, "Gaussian packet residual after %d steps %.2e of the initial norm", steps, prev / n0);

  double worst_fd = 0.0, worst_rk4 = 0.0;
  for (double b : {0.0, 0.1}) {
    const RealField q = external_potential(DeviceGeometry{}, d.grid, b);
    for (double k : {0.3, 0.47, -0.3, -0.55}) {
      const double E = dispersion(d.params, k, b);
      worst_fd = std::max(worst_fd, d.invariance(d.discrete_state(q, E, k > 0), q, E, 500));
      const WaveField w = solve_scattering(d.params, d.grid, k, q, b);
      worst_rk4 = std::max(worst_rk4, d.invariance(w.values, q, E, 500));
    }
  }
  verdict("4b", worst_fd < 1e-3, "frozen scattering state of the discrete scheme, 500 steps, max drift %.2e",
          worst_fd);
  note("RK4 scattering states of the continuous equation drift by %.2e (discretization gap, not a closure error)",
       worst_rk4);

  const double gap0 = d.gauge_gap(0.0, 100), gap1 = d.gauge_gap(-0.1, 100);
  verdict("4c", gap0 < 1e-10 && gap1 < 1e-10, "gauge closure vs constant closure over 100 steps: %.2e at Q_L = 0, %.2e at Q_L = -0.1 eV",
          gap0, gap1);

  verdict("4d", increases == 0, "homogeneous norm non-increasing at every step (%d increases in %d steps)", increases,
          steps);
}

// ---------------------------------------------------------------------------

struct DeskRun {
  TransientArtifacts oma, direct;
  std::vector<double> oma_wall, direct_wall;
};

DeskRun desk_runs() {
  DeskRun d;
  RunConfig c;
  c.transient.record_every = 1;
  c.transient.scan_times.clear();
  c.transient.snapshots = 20;
  d.oma = run_transient(c);
  c.engine = Engine::Direct;
  c.transient.snapshots = 0;
  c.transient.scan_times = {1e-13, 2e-12};
  d.direct = run_transient(c);
  d.oma_wall = {d.oma.wall_seconds};
  d.direct_wall = {d.direct.wall_seconds};
  // repeated timing runs; the minimum discounts interference from other load
  for (int i = 0; i < 2; ++i) {
    RunConfig t;
    d.oma_wall.push_back(run_transient(t).wall_seconds);
    t.engine = Engine::Direct;
    d.direct_wall.push_back(run_transient(t).wall_seconds);
  }
  return d;
}

double frozen_decay(const RealField& v, double bias, double T, double* expected) {
  RunConfig c;
  const DeviceSetup dev = c.device_setup();
  const SpatialGrid& grid = dev.grid;
  const RealField q = dev.total_potential(v, bias);
  const Resonance r = first_resonance(dev.params, grid, q, dev.geom.a2, dev.geom.b2);
  const CnScheme sc = make_scheme(dev.params, grid, 1.0);
  const int steps = static_cast<int>(std::lround(T / sc.dt));
  const DtbcKernel kl = build_kernel(sc.sigma(q.front()), sc.R(), steps);
  const DtbcKernel kr = build_kernel(sc.sigma(q.back()), sc.R(), steps);
  const CnStepOperator op(sc, q, kl.s[0], kr.s[0]);
  CnEvolution ev(r.l2_mode(grid), BoundaryMode::Homogeneous);
  auto well = [&](std::span<const cplx> psi) {
    RealField m(psi.size());
    for (std::size_t j = 0; j < psi.size(); ++j) m[j] = std::norm(psi[j]);
    return integrate_interval(m, grid, dev.geom.a2, dev.geom.b2);
  };
  const double n0 = well(ev.psi());
  for (int l = 0; l < steps; ++l) ev.step(sc, op, kl, kr);
  *expected = std::exp(-r.width() * T / dev.params.hbar());
  return well(ev.psi()) / n0;
}

void resonant_decay(const DeskRun& d) {
  const auto& s = d.oma.series;
  const double t0 = 1000.0, T = 1000.0, hbar = units::kHbar;
  auto at = [&](double t) {
    return *std::min_element(s.begin(), s.end(),
                             [&](const auto& a, const auto& b) { return std::abs(a.t - t) < std::abs(b.t - t); });
  };
  double integral = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i - 1].t >= t0 - 1e-9 && s[i].t <= t0 + T + 1e-9) {
      integral += 0.5 * (s[i - 1].width + s[i].width) * (s[i].t - s[i - 1].t);
    }
  }
  const double ratio = at(t0 + T).well_norm_v / at(t0).well_norm_v;
  const double expected = std::exp(-integral / hbar);
  double frozen_expected = 0.0;
  const double frozen = frozen_decay(d.oma.asymptotic_state.potential, 0.1, T, &frozen_expected);
  const double rel = std::abs(frozen / frozen_expected - 1.0);
  verdict("5", std::abs(ratio - expected) <= 0.02 && rel <= 0.05,
          "N(2 ps)/N(1 ps) = %.4f vs exp(-int Gamma/hbar) = %.4f; frozen mode decay %.4f vs %.4f (%.1f %%)", ratio,
          expected, frozen, frozen_expected, 100.0 * rel);
}

// ---------------------------------------------------------------------------

void economy(const DeskRun& d) {
  const TransientSetup ts = transient_setup(d.oma.config);
  const long long oma = d.oma.solves_per_step, direct = d.direct.solves_per_step;
  const bool counts = oma == ts.P_coarse + 2 && direct == ts.P + 1 &&
                      d.oma.schrodinger_solves == oma * ts.steps && d.direct.schrodinger_solves == direct * ts.steps;
  const double oma_wall = *std::min_element(d.oma_wall.begin(), d.oma_wall.end());
  const double direct_wall = *std::min_element(d.direct_wall.begin(), d.direct_wall.end());
  const double ratio = oma_wall / direct_wall;
  verdict("6", counts && ratio <= 0.6,
          "CN solves per step: OMA %lld (P' = %d intervals, %d nodes, plus the resonant mode), direct %lld (P = %d "
          "intervals, %d nodes); best wall %.2f s vs %.2f s, ratio %.3f",
          oma, ts.P_coarse, ts.P_coarse + 1, direct, ts.P, ts.P + 1, oma_wall, direct_wall, ratio);
  std::string samples;
  for (std::size_t i = 0; i < d.oma_wall.size(); ++i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, " %.2f/%.2f", d.oma_wall[i], d.direct_wall[i]);
    samples += buf;
  }
  note("wall samples OMA/direct (s):%s", samples.c_str());
}

// ---------------------------------------------------------------------------

std::size_t argmax(const RealField& f) {
  return static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
}

void peak_migration(const DeskRun& d) {
  const TransientSetup ts = transient_setup(d.oma.config);
  const DeviceSetup& dev = ts.device;
  const double cell = 2.0 * dev.cutoff() / ts.P_coarse;
  const double k_initial = std::sqrt(dev.params.gamma() * d.oma.initial_state.row.energy);
  const auto& scans = d.oma.scans;

  const KScan* early = nullptr;
  for (const auto& s : scans) {
    if (s.l == 100) early = &s;
  }
  const KScan& last = scans.back();
  const double k_early = early ? early->k[argmax(early->C)] : 0.0;
  const double c_early = std::abs(std::abs(k_early) - k_initial) / cell;
  const double k_last = last.k[argmax(last.C)];
  const double c_last = std::abs(k_last - last.k_plus) / cell;

  double worst_lambda = 0.0;
  double worst_t = 0.0;
  for (const auto& s : scans) {
    const double k = s.k[argmax(s.C_lambda)];
    const double c = std::min(std::abs(k - s.k_plus), std::abs(k - s.k_minus)) / cell;
    if (c > worst_lambda) {
      worst_lambda = c;
      worst_t = s.t;
    }
  }
  verdict("7", early && c_early <= 2.0 && c_last <= 2.0 && worst_lambda <= 1.0,
          "peak migration in coarse cells (%.4g nm^-1): C at 0.1 ps %.2f from the initial k_R; C at %.0f fs %.2f from "
          "k_R+; |lambda| worst %.2f from k_R+- (t = %.0f fs)",
          cell, c_early, last.t, c_last, worst_lambda, worst_t);
  std::size_t near_plus = 0;
  for (std::size_t p = 1; p + 1 < last.k.size(); ++p) {
    const bool peak = last.C[p] > last.C[p - 1] && last.C[p] > last.C[p + 1];
    if (peak && std::abs(last.k[p] - last.k_plus) < std::abs(last.k[near_plus] - last.k_plus)) near_plus = p;
  }
  note("final scan: argmax C at k = %.4f, k_R- = %.4f, k_R+ = %.4f; the local peak nearest k_R+ is at %.4f (%.2f "
       "cells, C %.3f vs %.3f at the maximum)",
       k_last, last.k_minus, last.k_plus, last.k[near_plus], std::abs(last.k[near_plus] - last.k_plus) / cell,
       last.C[near_plus], last.C[argmax(last.C)]);
  for (const auto& s : scans) {
    const double k = s.k[argmax(s.C_lambda)];
    note("t %6.0f fs  E %.2f meV  argmax C %+.4f  argmax |lambda| %+.4f  k_R- %+.4f  k_R+ %+.4f", s.t,
         meV(s.energy), s.k[argmax(s.C)], k, s.k_minus, s.k_plus);
  }
}

// ---------------------------------------------------------------------------

void lambda_oracle() {
  const double hbar = units::kHbar;
  const cplx z(0.08, -1.8e-4);
  const double T = 500.0;
  const cplx exact = std::exp(cplx(0.0, -1.0) * z * T / hbar);
  std::vector<double> errs;
  for (double dt : {2.0, 1.0, 0.5, 0.25}) {
    cplx lam = 1.0;
    const int n = static_cast<int>(std::lround(T / dt));
    for (int l = 0; l < n; ++l) lam = lambda_step(lam, z, 0.0, 0.0, dt, hbar);
    errs.push_back(std::abs(lam - exact));
  }
  bool order_ok = true;
  std::string orders;
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double p = std::log2(errs[i - 1] / errs[i]);
    order_ok = order_ok && std::abs(p - 2.0) <= 0.2;
    char buf[16];
    std::snprintf(buf, sizeof buf, " %.3f", p);
    orders += buf;
  }

  const double E = 0.08;
  const cplx s0(2e-3, 1e-3);
  auto src = [&](double t) { return s0 * std::polar(1.0, -E * t / hbar); };
  cplx lam = 0.0;
  const int n = 2000;
  for (int l = 0; l < n; ++l) lam = lambda_step(lam, E, src(l), src(l + 1.0), 1.0, hbar);
  const double slope = std::abs(lam) / n / std::abs(s0);
  verdict("9", order_ok && std::abs(slope - 1.0) <= 0.02,
          "lambda ODE: free decay orders%s; resonant forcing slope %.4f of the exact", orders.c_str(), slope);
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  resonance_table();
  chi_oracle();
  stationary_oma();
  dtbc_properties();
  const DeskRun desk = desk_runs();
  resonant_decay(desk);
  economy(desk);
  peak_migration(desk);
  std::printf("8   N/A   full-scale CPU times are hardware bound; criterion 6 carries the cost comparison. The "
              "P = 1500, 8 ps run is a config change (mesh.P, mesh.P_coarse, mesh.final_time).\n");
  lambda_oracle();
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d criteria failed, %.1f s\n", failures, wall);
  return failures == 0 ? 0 : 1;
}
