#include <doctest.h>

#include <cmath>

#include "rtd/driver.hpp"
#include "rtd/oma_transient.hpp"

using namespace rtd;

namespace {

cplx evolve_lambda(cplx z, double T, double dt, const std::function<cplx(double)>& source) {
  const double hbar = units::kHbar;
  cplx lam = 1.0;
  const int n = static_cast<int>(std::lround(T / dt));
  for (int l = 0; l < n; ++l) lam = lambda_step(lam, z, source(l * dt), source((l + 1) * dt), dt, hbar);
  return lam;
}

}  // namespace

TEST_CASE("lambda step is second order on the free decay") {
  const cplx z(0.08, -1.8e-4);
  const double T = 500.0;
  const cplx exact = std::exp(cplx(0.0, -1.0) * z * T / units::kHbar);
  auto none = [](double) { return cplx(0.0); };
  double prev = 0.0;
  for (double dt : {2.0, 1.0, 0.5, 0.25}) {
    const double err = std::abs(evolve_lambda(z, T, dt, none) - exact);
    if (prev > 0) CHECK(std::log2(prev / err) == doctest::Approx(2.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("resonant forcing grows linearly") {
  // lambda' + (i/hbar) E lambda = s0 e^{-i E t/hbar}, lambda(0) = 0  ->  s0 t e^{-i E t/hbar}
  const double E = 0.08, hbar = units::kHbar;
  const cplx s0(2e-3, 1e-3);
  auto src = [&](double t) { return s0 * std::polar(1.0, -E * t / hbar); };
  const double dt = 1.0;
  cplx lam = 0.0;
  const int n = 2000;
  for (int l = 0; l < n; ++l) lam = lambda_step(lam, E, src(l * dt), src((l + 1) * dt), dt, hbar);
  const double slope = std::abs(lam) / (n * dt);
  CHECK(slope == doctest::Approx(std::abs(s0)).epsilon(0.02));
}

TEST_CASE("phase alignment") {
  SpatialGrid grid(100, 10.0);
  ComplexField u(grid.nodes());
  for (int j = 0; j <= grid.J; ++j) u[j] = std::polar(std::sin(0.3 * grid.x(j)) + 0.1, 0.02 * j);
  ComplexField rotated(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) rotated[j] = u[j] * std::polar(1.0, 1.234);
  const PhaseAlignment a = align_phase(rotated, u, grid);
  for (std::size_t j = 0; j < u.size(); ++j) CHECK(std::abs(a.u[j] - u[j]) < 1e-12);
  CHECK(a.mu_residual < 1e-14);
  CHECK(std::abs(a.omega) > 0.0);
  ComplexField zero(u.size());
  CHECK_THROWS_AS(align_phase(zero, u, grid), ResonanceError);
}

TEST_CASE("source interpolation") {
  const double hbar = units::kHbar;
  const cplx I(0.3, -0.2);
  // same node (nu = 1): no phase shift
  CHECK(std::abs(interpolate_source(I, 0.1, 0.1, 123.0, 0.3, hbar) - cplx(0.0, 0.3 / hbar) * I) < 1e-15);
  // at t = 0 the shift vanishes for any pair of nodes
  CHECK(std::abs(interpolate_source(I, 0.1, 0.12, 0.0, 0.3, hbar) - cplx(0.0, 0.3 / hbar) * I) < 1e-15);
  const cplx s = interpolate_source(I, 0.1, 0.12, 50.0, 0.3, hbar);
  CHECK(std::abs(s) == doctest::Approx(0.3 / hbar * std::abs(I)));
  CHECK(std::abs(s - cplx(0.0, 0.3 / hbar) * I * std::polar(1.0, -0.02 * 50.0 / hbar)) < 1e-14);
}

TEST_CASE("trapezoid sum") {
  const FrequencyMesh m = uniform_mesh(1.0, 10);
  std::vector<double> f(m.size(), 2.0);
  CHECK(trapezoid_sum(f, m) == doctest::Approx(4.0));
}

TEST_CASE("initial transient density matches the stationary OMA state") {
  RunConfig c;
  c.cache.clear();
  const TransientSetup ts = transient_setup(c);
  StationaryRequest r;
  r.oma_intervals = ts.P;
  const StationaryArtifacts st = run_stationary(c, r);
  OmaTransient oma(ts, st.potential);
  CHECK(oma.nu() == 2);
  CHECK(oma.coarse_mesh().size() == 151);
  CHECK(oma.fine_mesh().size() == 301);
  for (cplx l : oma.lambda()) CHECK(l == cplx(0.0));
  CHECK(100.0 * relative_l2(oma.initial_density(), st.density) < 5.0);
  CHECK(oma.cross_term() < 0.05);
}

TEST_CASE("OMA transient performs P' + 1 solves per step") {
  RunConfig c;
  c.cache.clear();
  c.mesh.final_time = 5e-15;
  const TransientSetup ts = transient_setup(c);
  StationaryRequest r;
  r.oma_intervals = ts.P;
  const StationaryArtifacts st = run_stationary(c, r);
  OmaTransient oma(ts, st.potential);
  DirectTransient dir(ts, st.potential);
  run_transient(ts, oma, st.potential);
  run_transient(ts, dir, st.potential);
  CHECK(oma.nonresonant_solves() == 5 * 151);
  CHECK(oma.v_solves() == 5);
  CHECK(dir.schrodinger_solves() == 5 * 301);
  CHECK(oma.mode().size() == static_cast<std::size_t>(ts.device.grid.nodes()));
}
