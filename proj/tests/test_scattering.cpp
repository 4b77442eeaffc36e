#include <doctest.h>

#include <array>
#include <cmath>

#include "rtd/scattering.hpp"

using namespace rtd;

namespace {

// Transmission of a piecewise constant profile by interface matching.
double transfer_transmission(const PhysicalParams& p, double E, const std::vector<double>& x,
                             const std::vector<double>& v) {
  // layer i is (x[i-1], x[i]) with potential v[i]; v.front() and v.back() are the leads
  using M = std::array<cplx, 4>;
  auto kk = [&](double vi) { return std::sqrt(cplx(p.gamma() * (E - vi), 0.0)); };
  M total{1.0, 0.0, 0.0, 1.0};
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const cplx k1 = kk(v[i]), k2 = kk(v[i + 1]);
    const double a = x[i];
    // coefficients (A, B) of A e^{ikx} + B e^{-ikx} on the left mapped to the right
    const cplx e1p = std::exp(cplx(0, 1) * k1 * a), e1m = std::exp(-cplx(0, 1) * k1 * a);
    const cplx e2p = std::exp(cplx(0, 1) * k2 * a), e2m = std::exp(-cplx(0, 1) * k2 * a);
    const cplx r = k1 / k2;
    M step{0.5 * (1.0 + r) * e1p / e2p, 0.5 * (1.0 - r) * e1m / e2p, 0.5 * (1.0 - r) * e1p / e2m,
           0.5 * (1.0 + r) * e1m / e2m};
    total = {step[0] * total[0] + step[1] * total[2], step[0] * total[1] + step[1] * total[3],
             step[2] * total[0] + step[3] * total[2], step[2] * total[1] + step[3] * total[3]};
  }
  // right side has no incoming wave: B_R = 0 = total[2] A + total[3] B
  const cplx B = -total[2] / total[3];
  const cplx A_R = total[0] + total[1] * B;
  return std::norm(A_R) * (kk(v.back()).real() / kk(v.front()).real());
}

}  // namespace

TEST_CASE("flat potential gives a plane wave") {
  PhysicalParams p;
  SpatialGrid grid(300, 135.0);
  RealField q(grid.nodes(), 0.0);
  for (double k : {0.2, -0.35}) {
    const WaveField w = solve_scattering(p, grid, k, q, 0.0);
    // RK4 phase error accumulates as J (k h)^5 / 120
    const double tol = 2.0 * grid.J * std::pow(std::abs(k) * grid.dx(), 5) / 120.0;
    for (int j = 0; j <= grid.J; j += 30) {
      CHECK(std::abs(w.values[j] - std::polar(1.0, k * grid.x(j))) < tol);
    }
    const ScatteringAmplitudes a = scattering_amplitudes(p, grid, w, 0.0);
    CHECK(std::abs(a.r) < 1e-6);
    CHECK(std::abs(std::abs(a.t) - 1.0) < tol);
  }
}

TEST_CASE("zero frequency carries no field") {
  PhysicalParams p;
  SpatialGrid grid(300, 135.0);
  const RealField q = external_potential(DeviceGeometry{}, grid, 0.0);
  const WaveField w = solve_scattering(p, grid, 0.0, q, 0.0);
  for (cplx v : w.values) CHECK(v == cplx(0.0));
}

TEST_CASE("flux conservation through the double barrier") {
  PhysicalParams p;
  SpatialGrid grid(300, 135.0);
  for (double b : {0.0, 0.1}) {
    const RealField q = external_potential(DeviceGeometry{}, grid, b);
    for (double k : {0.15, 0.3, 0.47, -0.2, -0.55}) {
      const WaveField w = solve_scattering(p, grid, k, q, b);
      const ScatteringAmplitudes a = scattering_amplitudes(p, grid, w, b);
      CHECK(std::norm(a.r) + a.k_out / a.k_in * std::norm(a.t) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("transmission matches the transfer matrix") {
  PhysicalParams p;
  DeviceGeometry g;
  SpatialGrid grid(2700, g.L);  // interfaces on nodes, fine enough for the sampled steps
  const RealField q = external_potential(g, grid, 0.0);
  const std::vector<double> x = {g.a2, g.a3, g.b3, g.b2};
  const std::vector<double> v = {0.0, g.v0, 0.0, g.v0, 0.0};
  for (double k : {0.2, 0.35, 0.55}) {
    const WaveField w = solve_scattering(p, grid, k, q, 0.0);
    const ScatteringAmplitudes a = scattering_amplitudes(p, grid, w, 0.0);
    const double tm = transfer_transmission(p, w.energy, x, v);
    CHECK(std::norm(a.t) == doctest::Approx(tm).epsilon(0.05));
  }
}

TEST_CASE("trapezoid density of unit fields") {
  PhysicalParams p;
  const FrequencyMesh mesh = uniform_mesh(default_cutoff(p), 40);
  std::vector<RealField> ones(mesh.size(), RealField(7, 1.0));
  std::vector<double> g(mesh.size());
  double ref = 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i) g[i] = injection_profile(p, mesh[i]);
  for (std::size_t i = 0; i + 1 < mesh.size(); ++i) ref += 0.5 * (mesh[i + 1] - mesh[i]) * (g[i] + g[i + 1]);
  const RealField n = density_trapezoid(std::span<const RealField>(ones), g, mesh);
  for (double v : n) CHECK(v == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("refinement clusters nodes at the resonant frequencies") {
  PhysicalParams p;
  const double kM = default_cutoff(p);
  const FrequencyMesh base = uniform_mesh(kM, 800);
  const double E = 0.08, G = 3.5e-4, B = 0.1;
  const FrequencyMesh m = refine_near_resonance(base, p, E, G, B);
  CHECK(std::is_sorted(m.begin(), m.end()));
  CHECK(m.size() > base.size());
  const ResonantFrequencies kr = resonant_frequencies(p, E, B);
  const double w = peak_halfwidth_k(p, kr.plus, G);
  int near = 0;
  for (double k : m) near += std::abs(k - kr.plus) <= w;
  CHECK(near >= 20);
  CHECK(m.front() == base.front());
  CHECK(m.back() == base.back());
}
