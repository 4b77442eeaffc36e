#include <doctest.h>

#include <cmath>

#include "rtd/core_model.hpp"

using namespace rtd;

TEST_CASE("dispersion") {
  PhysicalParams p;
  CHECK(dispersion(p, 0.0, 0.0) == 0.0);
  CHECK(dispersion(p, -0.3, 0.0) == dispersion(p, 0.3, 0.0));
  CHECK(dispersion(p, -0.3, 0.1) == doctest::Approx(p.kinetic_scale() * 0.09 - 0.1).epsilon(1e-14));
  CHECK(dispersion(p, 0.3, 0.1) == doctest::Approx(p.kinetic_scale() * 0.09).epsilon(1e-14));
}

TEST_CASE("doping profile") {
  DeviceGeometry g;
  SpatialGrid grid(270, g.L);
  const RealField n = doping_profile(g, grid);
  CHECK(n[0] == g.nD1);
  CHECK(n[static_cast<int>(std::lround(0.5 * (g.a1 + g.b1) / grid.dx()))] == g.nD2);
  g.nD2 = g.nD1;
  for (double v : doping_profile(g, grid)) CHECK(v == g.nD1);
}

TEST_CASE("filled potential is external plus the well") {
  DeviceGeometry g;
  for (int J : {270, 299, 300}) {
    SpatialGrid grid(J, g.L);
    for (double b : {0.0, 0.1}) {
      const RealField u = external_potential(g, grid, b);
      const RealField f = filled_potential(g, grid, b);
      for (int j = 0; j <= J; ++j) CHECK(f[j] == u[j] + (in_closed(grid.x(j), g.a3, g.b3) ? g.v0 : 0.0));
    }
  }
}

TEST_CASE("external potential values") {
  DeviceGeometry g;
  SpatialGrid grid(270, g.L);  // dx = 0.5, nodes on every interface
  const RealField u = external_potential(g, grid, 0.1);
  CHECK(u[0] == 0.0);
  CHECK(u[grid.J] == doctest::Approx(-0.1));
  CHECK(u[100] == 0.0);
  CHECK(u[120] == doctest::Approx(g.v0 - 0.1 * 10.0 / 35.0));  // x = a2 takes the barrier value
  CHECK(u[130] == doctest::Approx(-0.1 * 15.0 / 35.0));        // x = a3 takes the well value
  CHECK(u[135] == doctest::Approx(-0.05));
  CHECK(u[170] == doctest::Approx(-0.1));
}

TEST_CASE("cubic ramp is C1") {
  BiasSchedule s{0.0, 0.1, 1000.0, BiasMode::CubicRamp};
  const double h = 1e-3;
  CHECK(bias_at(s, 0.0) == 0.0);
  CHECK(bias_at(s, 1000.0) == doctest::Approx(0.1));
  CHECK(bias_at(s, 500.0) == doctest::Approx(0.05));
  CHECK(std::abs(bias_at(s, h) - bias_at(s, 0.0)) / h < 1e-6);
  CHECK(std::abs(bias_at(s, 1000.0) - bias_at(s, 1000.0 - h)) / h < 1e-6);
  CHECK(bias_at(s, 2000.0) == 0.1);
  BiasSchedule step{0.0, 0.1, 0.0, BiasMode::Step};
  CHECK(bias_at(step, 0.0) == 0.0);
  CHECK(bias_at(step, 1.0) == 0.1);
}

TEST_CASE("injection profile is even") {
  PhysicalParams p;
  for (double k = 0.0; k < 1.0; k += 0.0137) CHECK(injection_profile(p, k) == injection_profile(p, -k));
}

TEST_CASE("injection profile integrates to the contact doping") {
  // full Fermi-Dirac integral of the default device equals nD1 = 1e24 m^-3
  PhysicalParams p;
  const int n = 20000;
  const double kM = 3.0;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double k = -kM + 2.0 * kM * i / n;
    s += (i == 0 || i == n ? 0.5 : 1.0) * injection_profile(p, k);
  }
  s *= 2.0 * kM / n;
  CHECK(s == doctest::Approx(1e-3).epsilon(1e-4));
}

TEST_CASE("uniform mesh is symmetric") {
  for (int P : {50, 51, 300}) {
    const FrequencyMesh k = uniform_mesh(0.6, P);
    CHECK(k.front() == -0.6);
    CHECK(k.back() == 0.6);
    for (int p = 0; p <= P; ++p) CHECK(k[p] == -k[P - p]);
  }
}

TEST_CASE("resonant frequencies") {
  PhysicalParams p;
  const ResonantFrequencies r = resonant_frequencies(p, 0.08, 0.1);
  CHECK(dispersion(p, r.plus, 0.1) == doctest::Approx(0.08));
  CHECK(dispersion(p, r.minus, 0.1) == doctest::Approx(0.08));
  CHECK(r.minus < 0.0);
  CHECK(r.plus > 0.0);
}

TEST_CASE("interval integral of the interpolant") {
  SpatialGrid grid(10, 1.0);
  RealField f(grid.nodes());
  for (int j = 0; j <= grid.J; ++j) f[j] = 2.0 * grid.x(j) + 1.0;
  CHECK(integrate_interval(f, grid, 0.13, 0.77) == doctest::Approx(0.77 * 0.77 - 0.13 * 0.13 + 0.64));
  CHECK(integrate_interval(f, grid, 0.13, 0.5) + integrate_interval(f, grid, 0.5, 0.77) ==
        doctest::Approx(integrate_interval(f, grid, 0.13, 0.77)).epsilon(1e-14));
}

TEST_CASE("validation") {
  DeviceGeometry g;
  g.a2 = 66.0;
  CHECK_THROWS_AS(g.validate(), ModelError);
  DeviceGeometry d;
  d.nD2 = 2.0 * d.nD1;
  CHECK_THROWS_AS(d.validate(), ModelError);
  CHECK_THROWS_AS(SpatialGrid(1, 10.0), ModelError);
  CHECK_THROWS_AS(bias_mode_from_string("ramp"), ModelError);
}
