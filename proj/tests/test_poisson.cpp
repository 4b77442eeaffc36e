#include <doctest.h>

#include <cmath>

#include "rtd/poisson.hpp"

using namespace rtd;

TEST_CASE("linear Poisson solves a uniform charge exactly") {
  PhysicalParams p;
  SpatialGrid grid(200, 135.0);
  const double c = 2e-5;
  RealField n(grid.nodes(), 1e-3 + c), nd(grid.nodes(), 1e-3);
  const RealField v = linear_poisson(p, grid, n, nd);
  for (int j = 0; j <= grid.J; ++j) {
    const double x = grid.x(j);
    CHECK(v[j] == doctest::Approx(p.coulomb() * c * x * (grid.L - x) / 2.0).epsilon(1e-10));
  }
}

TEST_CASE("damped step keeps a neutral state") {
  PhysicalParams p;
  SpatialGrid grid(200, 135.0);
  RealField nd(grid.nodes(), 1e-3), v0(grid.nodes(), 0.0);
  const RealField v = gummel_poisson_step(p, grid, v0, nd, nd, p.thermal_energy());
  for (double x : v) CHECK(std::abs(x) < 1e-14);
}

TEST_CASE("damped step tends to the linear solve for a large reference") {
  PhysicalParams p;
  SpatialGrid grid(200, 135.0);
  RealField n(grid.nodes()), nd(grid.nodes(), 1e-3), v0(grid.nodes(), 0.0);
  for (int j = 0; j <= grid.J; ++j) n[j] = 1e-3 * (1.0 + 0.1 * std::sin(grid.x(j)));
  const RealField lin = linear_poisson(p, grid, n, nd);
  const RealField damped = gummel_poisson_step(p, grid, v0, n, nd, 1e6);
  for (int j = 0; j <= grid.J; ++j) CHECK(damped[j] == doctest::Approx(lin[j]).epsilon(1e-5).scale(1e-6));
}

TEST_CASE("damped step satisfies its own equation") {
  PhysicalParams p;
  SpatialGrid grid(150, 135.0);
  RealField n(grid.nodes()), nd(grid.nodes(), 1e-3), v0(grid.nodes(), 0.0);
  for (int j = 0; j <= grid.J; ++j) {
    n[j] = 1e-3 * (1.0 + 0.3 * std::cos(0.1 * grid.x(j)));
    v0[j] = 0.02 * std::sin(units::kPi * grid.x(j) / grid.L);
  }
  const double vr = p.thermal_energy();
  const RealField v = gummel_poisson_step(p, grid, v0, n, nd, vr);
  const double h2 = grid.dx() * grid.dx();
  CHECK(v.front() == 0.0);
  CHECK(v.back() == 0.0);
  for (int j = 1; j < grid.J; ++j) {
    const double lhs = -(v[j - 1] - 2.0 * v[j] + v[j + 1]) / h2;
    const double rhs = p.coulomb() * (n[j] * std::exp((v0[j] - v[j]) / vr) - nd[j]);
    CHECK(lhs == doctest::Approx(rhs).scale(1e-9));
  }
}

TEST_CASE("relative change") {
  RealField a = {0.0, 0.0}, b = {0.0, 0.0};
  CHECK(relative_change(a, b) == 0.0);
  RealField c = {3.0, 4.0};
  CHECK(relative_change(c, b) == doctest::Approx(1.0));
}

TEST_CASE("Gummel loop on a neutral engine") {
  PhysicalParams p;
  SpatialGrid grid(100, 135.0);
  RealField nd(grid.nodes(), 1e-3);
  auto engine = [&](std::span<const double>) { return nd; };
  const GummelState s = gummel_loop(p, grid, nd, engine, RealField(grid.nodes(), 0.0));
  CHECK(s.converged);
  CHECK(s.iterations <= 3);
  for (double x : s.potential) CHECK(x == 0.0);
}

TEST_CASE("Gummel loop on a Boltzmann engine") {
  PhysicalParams p;
  SpatialGrid grid(100, 135.0);
  RealField nd(grid.nodes());
  for (int j = 0; j <= grid.J; ++j) nd[j] = grid.x(j) < 60 || grid.x(j) > 80 ? 1e-3 : 1e-5;
  const double kT = p.thermal_energy();
  auto engine = [&](std::span<const double> v) {
    RealField n(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) n[j] = 1e-3 * std::exp(-v[j] / kT);
    return n;
  };
  const GummelState s = gummel_loop(p, grid, nd, engine, RealField(grid.nodes(), 0.0));
  CHECK(s.converged);
  // the fixed point of a Boltzmann engine is reached by the first damped step
  CHECK(s.iterations <= 4);
  for (std::size_t l = 1; l < s.errors.size(); ++l) CHECK(s.errors[l] < s.errors[l - 1]);
}

TEST_CASE("Gummel loop reports divergence with its trace") {
  PhysicalParams p;
  SpatialGrid grid(50, 135.0);
  RealField nd(grid.nodes(), 1e-3);
  int calls = 0;
  auto engine = [&](std::span<const double> v) {
    RealField n(v.size(), (++calls % 2) ? 2e-3 : 0.5e-3);
    return n;
  };
  GummelOptions o;
  o.max_iterations = 10;
  try {
    gummel_loop(p, grid, nd, engine, RealField(grid.nodes(), 0.0), o);
    FAIL("expected divergence");
  } catch (const GummelDivergence& e) {
    CHECK(e.state().errors.size() == 10);
    CHECK_FALSE(e.state().converged);
  }
}
