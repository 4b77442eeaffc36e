#include <doctest.h>

#include <cmath>

#include "rtd/driver.hpp"

using namespace rtd;

namespace {

RunConfig quiet() {
  RunConfig c;
  c.cache.clear();
  return c;
}

}  // namespace

TEST_CASE("OMA stationary state at zero bias") {
  RunConfig c = quiet();
  const StationaryArtifacts a = run_stationary(c);
  CHECK(a.converged);
  CHECK(a.frequency_points == 51);
  CHECK(std::abs(a.row.gummel_iterations - 37) <= 10);
  CHECK(a.row.energy == doctest::Approx(0.12755).epsilon(0.02));
  CHECK(a.row.width / a.row.energy == doctest::Approx(2.58e-3).epsilon(0.1));
  for (std::size_t l = 5; l < a.trace.size(); ++l) CHECK(a.trace[l] < a.trace[l - 1]);
}

TEST_CASE("cold OMA start under bias continues from zero bias") {
  RunConfig c = quiet();
  StationaryRequest r;
  r.bias = 0.1;
  const StationaryArtifacts a = run_stationary(c, r);
  CHECK(a.continued_from_zero_bias);
  CHECK(a.row.energy == doctest::Approx(0.081).epsilon(0.02));
  CHECK(a.row.width / a.row.energy == doctest::Approx(4.40e-3).epsilon(0.1));
}

TEST_CASE("direct stationary state refines around the resonance") {
  RunConfig c = quiet();
  c.engine = Engine::Direct;
  const StationaryArtifacts a = run_stationary(c);
  CHECK(a.converged);
  CHECK(a.frequency_points > 458);
  CHECK(a.frequency_points < 1832);
  CHECK(a.row.energy == doctest::Approx(0.12755).epsilon(0.01));
}

TEST_CASE("flat device density misses only the zero frequency node") {
  // without barriers every k != 0 state is a unit plane wave; k = 0 carries no field
  RunConfig c = quiet();
  c.geometry.v0 = 0.0;
  c.doping.nD2 = c.doping.nD1;
  const DeviceSetup dev = c.device_setup();
  DirectOptions o;
  o.refine = false;
  DirectEngine e(dev, 0.0, o);
  const RealField n = e(RealField(dev.grid.nodes(), 0.0));
  const FrequencyMesh k = uniform_mesh(dev.cutoff(), o.base_intervals);
  double trap = 0.0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    trap += 0.5 * (k[i + 1] - k[i]) * (injection_profile(dev.params, k[i]) + injection_profile(dev.params, k[i + 1]));
  }
  const double missing = injection_profile(dev.params, 0.0) * (k[1] - k[0]);
  for (double v : n) CHECK(v == doctest::Approx(trap - missing).epsilon(1e-6));
}
