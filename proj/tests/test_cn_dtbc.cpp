#include <doctest.h>

#include <cmath>

#include "rtd/cn_dtbc.hpp"
#include "rtd/scattering.hpp"

using namespace rtd;

namespace {

const PhysicalParams kParams;
const SpatialGrid kGrid(299, 135.0);

// Stationary state of the three-point scheme with an outgoing discrete wave
// on the exit side, built by running the recurrence inward.
ComplexField discrete_state(const CnScheme& sc, std::span<const double> q, double E, bool from_left) {
  const int J = kGrid.J;
  const double g = sc.gamma * sc.dx * sc.dx;
  ComplexField phi(J + 1);
  const int end = from_left ? J : 0;
  const int dir = from_left ? -1 : 1;
  const double kap = std::acos(1.0 - 0.5 * g * (E - q[end]));
  cplx outer = std::polar(1.0, kap), cur = 1.0;
  phi[end] = cur;
  for (int j = end; j != J - end; j += dir) {
    const cplx next = (2.0 - g * (E - q[j])) * cur - outer;
    phi[j + dir] = next;
    outer = cur;
    cur = next;
  }
  return phi;
}

double relative_distance(std::span<const cplx> a, std::span<const cplx> b) {
  ComplexField d(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) d[j] = a[j] - b[j];
  return discrete_norm(d, kGrid.dx()) / discrete_norm(b, kGrid.dx());
}

}  // namespace

TEST_CASE("kernel matches the exterior Z-transform") {
  const CnScheme sc = make_scheme(kParams, kGrid, 1.0);
  for (double q : {0.0, -0.1, 0.05, 0.3}) {
    const DtbcKernel k = build_kernel(sc.sigma(q), sc.R(), 4000);
    for (cplx z : {cplx(1.1, 0.0), cplx(0.0, 1.2), cplx(-0.8, 0.9)}) {
      cplx sum = 0.0;
      for (int l = k.l_max(); l >= 0; --l) sum = sum / z + k.s[l];
      const cplx kappa = cplx(0.0, sc.R()) * (z - 1.0) / (z + 1.0) + sc.w() * q;
      const cplx b = 2.0 - kappa, d = std::sqrt(b * b - 4.0);
      const cplx n1 = 0.5 * (b + d), n2 = 0.5 * (b - d);
      const cplx nu = std::abs(n1) < 1.0 ? n1 : n2;
      const cplx ref = (1.0 + 1.0 / z) / nu;
      CHECK(std::abs(sum - ref) < 1e-10 * std::abs(ref));
    }
  }
}

TEST_CASE("kernel decays like l^-3/2") {
  const CnScheme sc = make_scheme(kParams, kGrid, 1.0);
  for (double q : {0.0, -0.1, 0.05, 0.3}) {
    const DtbcKernel k = build_kernel(sc.sigma(q), sc.R(), 2000);
    const double slope = std::log(std::abs(k.s[2000]) / std::abs(k.s[50])) / std::log(40.0);
    CHECK(slope == doctest::Approx(-1.5).epsilon(0.2 / 1.5));
  }
}

TEST_CASE("kernel parameter stays in the Legendre range") {
  for (double sigma : {-8.0, -4.0, -2.0, -0.5, 0.0, 0.3, 5.0}) {
    for (double R : {0.01, 0.47, 3.0}) CHECK(std::abs(build_kernel(sigma, R, 4).mu) <= 1.0);
  }
}

TEST_CASE("zero state stays zero") {
  const CnScheme sc = make_scheme(kParams, kGrid, 1.0);
  const DtbcKernel k = build_kernel(0.0, sc.R(), 60);
  const CnStepOperator op(sc, RealField(kGrid.nodes(), 0.0), k.s[0], k.s[0]);
  CnEvolution ev(ComplexField(kGrid.nodes()), BoundaryMode::Homogeneous);
  for (int l = 0; l < 50; ++l) ev.step(sc, op, k, k);
  for (cplx v : ev.psi()) CHECK(v == cplx(0.0));
}

TEST_CASE("Gaussian packet leaves the domain") {
  const CnScheme sc = make_scheme(kParams, kGrid, 1.0);
  ComplexField psi(kGrid.nodes());
  for (int j = 0; j <= kGrid.J; ++j) {
    const double x = kGrid.x(j) - 0.5 * kGrid.L;
    psi[j] = std::exp(-x * x / 200.0) * std::polar(1.0, 0.5 * kGrid.x(j));
  }
  const int steps = 2000;
  const DtbcKernel k = build_kernel(0.0, sc.R(), steps);
  const CnStepOperator op(sc, RealField(kGrid.nodes(), 0.0), k.s[0], k.s[0]);
  CnEvolution ev(psi, BoundaryMode::Homogeneous);
  const double n0 = discrete_norm(psi, kGrid.dx());
  double prev = n0;
  bool monotone = true, conserved_inside = true;
  for (int l = 1; l <= steps; ++l) {
    ev.step(sc, op, k, k);
    const double n = discrete_norm(ev.psi(), kGrid.dx());
    if (n > prev * (1.0 + 1e-13)) monotone = false;
    // while the packet is far from both ends the scheme is unitary
    if (l <= 5 && std::abs(n - n0) > 1e-9 * n0) conserved_inside = false;
    prev = n;
  }
  CHECK(monotone);
  CHECK(conserved_inside);
  CHECK(prev < 1e-4 * n0);
}

TEST_CASE("frozen scattering states are invariant") {
  const CnScheme sc = make_scheme(kParams, kGrid, 1.0);
  const int steps = 500;
  for (double b : {0.0, 0.1}) {
    const RealField q = external_potential(DeviceGeometry{}, kGrid, b);
    const DtbcKernel kl = build_kernel(sc.sigma(q.front()), sc.R(), steps);
    const DtbcKernel kr = build_kernel(sc.sigma(q.back()), sc.R(), steps);
    const CnStepOperator op(sc, q, kl.s[0], kr.s[0]);
    for (double k : {0.3, 0.47, -0.3, -0.55}) {
      const double E = dispersion(kParams, k, b);
      const ComplexField phi = discrete_state(sc, q, E, k > 0);
      CnEvolution ev(phi, BoundaryMode::NonHomogeneous, make_nonhomogeneous(phi, E, E, sc, PhaseRule::Cayley));
      const cplx rho = step_phase(E, sc, PhaseRule::Cayley);
      double worst = 0.0;
      cplx phase = 1.0;
      for (int l = 1; l <= steps; ++l) {
        ev.step(sc, op, kl, kr);
        phase *= rho;
        ComplexField ref(phi.size());
        for (std::size_t j = 0; j < phi.size(); ++j) ref[j] = phi[j] * phase;
        worst = std::max(worst, relative_distance(ev.psi(), ref));
      }
      CHECK(worst < 1e-3);
    }
  }
}

TEST_CASE("continuous scattering states drift only by the discretization error") {
  const CnScheme sc = make_scheme(kParams, kGrid, 1.0);
  const RealField q = external_potential(DeviceGeometry{}, kGrid, 0.1);
  const int steps = 500;
  const DtbcKernel kl = build_kernel(sc.sigma(q.front()), sc.R(), steps);
  const DtbcKernel kr = build_kernel(sc.sigma(q.back()), sc.R(), steps);
  const CnStepOperator op(sc, q, kl.s[0], kr.s[0]);
  const WaveField w = solve_scattering(kParams, kGrid, 0.3, q, 0.1);
  CnEvolution ev(w.values, BoundaryMode::NonHomogeneous,
                 make_nonhomogeneous(w.values, w.energy, w.energy, sc, PhaseRule::Cayley));
  for (int l = 0; l < steps; ++l) ev.step(sc, op, kl, kr);
  ComplexField ref(w.values.size());
  const cplx phase = std::pow(step_phase(w.energy, sc, PhaseRule::Cayley), steps);
  for (std::size_t j = 0; j < ref.size(); ++j) ref[j] = w.values[j] * phase;
  CHECK(relative_distance(ev.psi(), ref) < 0.05);
}

TEST_CASE("gauge closure equals the constant closure at Q_L = 0") {
  const CnScheme sc = make_scheme(kParams, kGrid, 1.0);
  const RealField q = external_potential(DeviceGeometry{}, kGrid, 0.0);
  const WaveField w = solve_scattering(kParams, kGrid, 0.3, q, 0.0);
  const int steps = 100;
  const DtbcKernel k0 = build_kernel(0.0, sc.R(), steps);
  const CnStepOperator op(sc, q, k0.s[0], k0.s[0]);
  CnEvolution a(w.values, BoundaryMode::NonHomogeneous, make_nonhomogeneous(w.values, w.energy, w.energy, sc, PhaseRule::Exact));
  CnEvolution b(w.values, BoundaryMode::TimeDependent, make_nonhomogeneous(w.values, w.energy, w.energy, sc, PhaseRule::Exact));
  GaugePhase gauge(0.0);
  double worst = 0.0;
  for (int l = 0; l < steps; ++l) {
    a.step(sc, op, k0, k0);
    b.step(sc, op, k0, k0, gauge.advance(0.0, sc));
    worst = std::max(worst, relative_distance(b.psi(), a.psi()));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("gauge closure agrees with the constant closure to first order when Q_L != 0") {
  // the gauge form is exact for the continuous exterior only; the discrete
  // gap is of order dt^2 Q_L^2 per step
  const CnScheme sc = make_scheme(kParams, kGrid, 1.0);
  const double QL = -0.1;
  const RealField q = external_potential(DeviceGeometry{}, kGrid, -QL);
  const WaveField w = solve_scattering(kParams, kGrid, 0.3, q, -QL);
  const int steps = 100;
  const DtbcKernel kl = build_kernel(0.0, sc.R(), steps);
  const DtbcKernel kr = build_kernel(sc.sigma(QL), sc.R(), steps);
  const CnStepOperator op2(sc, q, kl.s[0], kr.s[0]);
  const CnStepOperator op3(sc, q, kl.s[0], kl.s[0]);
  CnEvolution a(w.values, BoundaryMode::NonHomogeneous, make_nonhomogeneous(w.values, w.energy, w.energy, sc, PhaseRule::Exact));
  CnEvolution b(w.values, BoundaryMode::TimeDependent,
                make_nonhomogeneous(w.values, w.energy, w.energy - QL, sc, PhaseRule::Exact));
  GaugePhase gauge(QL);
  double worst = 0.0;
  for (int l = 0; l < steps; ++l) {
    a.step(sc, op2, kl, kr);
    b.step(sc, op3, kl, kl, gauge.advance(QL, sc));
    worst = std::max(worst, relative_distance(b.psi(), a.psi()));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("step cost grows linearly with the history") {
  const CnScheme sc = make_scheme(kParams, kGrid, 1.0);
  const DtbcKernel k = build_kernel(0.0, sc.R(), 200);
  const CnStepOperator op(sc, RealField(kGrid.nodes(), 0.0), k.s[0], k.s[0]);
  ComplexField psi(kGrid.nodes());
  psi[150] = 1.0;
  CnEvolution ev(psi, BoundaryMode::Homogeneous);
  std::vector<long long> w = {ev.work()};
  for (int l = 0; l < 200; ++l) {
    ev.step(sc, op, k, k);
    w.push_back(ev.work());
  }
  const long long d1 = w[100] - w[99], d2 = w[150] - w[149], d3 = w[200] - w[199];
  CHECK(d2 - d1 == d3 - d2);
  CHECK(d2 > d1);
  CHECK(ev.solves() == 200);
}

TEST_CASE("evolution refuses to outrun its kernel") {
  const CnScheme sc = make_scheme(kParams, kGrid, 1.0);
  const DtbcKernel k = build_kernel(0.0, sc.R(), 3);
  const CnStepOperator op(sc, RealField(kGrid.nodes(), 0.0), k.s[0], k.s[0]);
  CnEvolution ev(ComplexField(kGrid.nodes()), BoundaryMode::Homogeneous);
  for (int l = 0; l < 3; ++l) ev.step(sc, op, k, k);
  CHECK_THROWS_AS(ev.step(sc, op, k, k), ModelError);
}

TEST_CASE("Cayley phase has unit modulus and second order accuracy") {
  const CnScheme sc = make_scheme(kParams, kGrid, 1.0);
  for (double E : {0.01, 0.08, 0.2}) {
    const cplx c = step_phase(E, sc, PhaseRule::Cayley), e = step_phase(E, sc, PhaseRule::Exact);
    CHECK(std::abs(c) == doctest::Approx(1.0).epsilon(1e-15));
    const double x = E * sc.dt / sc.hbar;
    CHECK(std::abs(c - e) < 0.1 * x * x * x);
  }
}
