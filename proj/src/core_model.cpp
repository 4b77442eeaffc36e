#include "rtd/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace rtd {

void PhysicalParams::validate() const {
  if (!(relative_mass > 0) || !(relative_permittivity > 0) || !(temperature > 0) || !(fermi_level > 0)) {
    throw ModelError("physical parameters must be strictly positive");
  }
}

void DeviceGeometry::validate() const {
  const double pts[] = {0.0, a1, a2, a3, b3, b2, b1, L};
  const char* names[] = {"0", "a1", "a2", "a3", "b3", "b2", "b1", "L"};
  for (int i = 0; i + 1 < 8; ++i) {
    if (!(pts[i] < pts[i + 1])) {
      throw ModelError(std::string("geometry invariant violated: ") + names[i] + " < " + names[i + 1]);
    }
  }
  if (!(nD1 >= nD2) || nD2 < 0) throw ModelError("doping invariant violated: nD1 >= nD2 >= 0");
  if (v0 < 0) throw ModelError("barrier height v0 must be non-negative");
}

std::string to_string(BiasMode mode) {
  switch (mode) {
    case BiasMode::Step: return "step";
    case BiasMode::CubicRamp: return "cubic-ramp";
    case BiasMode::Constant: return "constant";
  }
  return "step";
}

BiasMode bias_mode_from_string(const std::string& name) {
  if (name == "step") return BiasMode::Step;
  if (name == "cubic-ramp") return BiasMode::CubicRamp;
  if (name == "constant") return BiasMode::Constant;
  throw ModelError("unknown bias mode '" + name + "'");
}

double bias_at(const BiasSchedule& sched, double t) {
  switch (sched.mode) {
    case BiasMode::Constant: return sched.initial;
    case BiasMode::Step: return t <= 0.0 ? sched.initial : sched.final;
    case BiasMode::CubicRamp: {
      if (t <= 0.0) return sched.initial;
      if (t >= sched.ramp_duration) return sched.final;
      const double s = t / sched.ramp_duration;
      return sched.initial + (sched.final - sched.initial) * s * s * (3.0 - 2.0 * s);
    }
  }
  return sched.initial;
}

SpatialGrid::SpatialGrid(int intervals, double length) : J(intervals), L(length) {
  if (J < 2 || !(L > 0)) throw ModelError("spatial grid needs J >= 2 and L > 0");
}

int Grids::nu() const {
  if (P_coarse <= 0 || P % P_coarse != 0) throw ModelError("P must be an integer multiple of P'");
  return P / P_coarse;
}

void Grids::validate(const PhysicalParams& params) const {
  if (P < 1) throw ModelError("P must be positive");
  (void)nu();
  if (!(kM > 0)) throw ModelError("frequency cutoff must be positive");
  if (!(dt > 0)) throw ModelError("time step must be positive");
  const double dx = space.dx();
  if (!(params.kinetic_scale() / (dx * dx) > 1.0)) {
    throw ModelError("stability condition hbar^2/(2m dx^2) > 1 violated");
  }
}

double default_cutoff(const PhysicalParams& params) {
  return std::sqrt(params.gamma() * (params.fermi_level + 7.0 * params.thermal_energy()));
}

FrequencyMesh uniform_mesh(double kM, int P) {
  FrequencyMesh k(P + 1);
  for (int p = 0; p <= P; ++p) k[p] = -kM + 2.0 * kM * p / P;
  // exact symmetry around the centre node
  for (int p = 0; p <= P / 2; ++p) k[P - p] = -k[p];
  if (P % 2 == 0) k[P / 2] = 0.0;
  return k;
}

bool in_closed(double x, double a, double b) {
  constexpr double tol = 1e-9;  // nm
  return x >= a - tol && x <= b + tol;
}

RealField external_potential(const DeviceGeometry& geom, const SpatialGrid& grid, double bias) {
  RealField u(grid.nodes());
  for (int j = 0; j <= grid.J; ++j) {
    const double x = grid.x(j);
    double value = 0.0;
    if (in_closed(x, geom.a2, geom.b2)) value += geom.v0;
    if (in_closed(x, geom.a3, geom.b3)) value -= geom.v0;
    double ramp = 0.0;
    if (x >= geom.b1) {
      ramp = 1.0;
    } else if (x >= geom.a1) {
      ramp = (x - geom.a1) / (geom.b1 - geom.a1);
    }
    u[j] = value - bias * ramp;
  }
  return u;
}

RealField filled_potential(const DeviceGeometry& geom, const SpatialGrid& grid, double bias) {
  RealField u = external_potential(geom, grid, bias);
  for (int j = 0; j <= grid.J; ++j) {
    if (in_closed(grid.x(j), geom.a3, geom.b3)) u[j] += geom.v0;
  }
  return u;
}

RealField doping_profile(const DeviceGeometry& geom, const SpatialGrid& grid) {
  RealField n(grid.nodes());
  for (int j = 0; j <= grid.J; ++j) {
    n[j] = in_closed(grid.x(j), geom.a1, geom.b1) ? geom.nD2 : geom.nD1;
  }
  return n;
}

namespace {
double log1p_exp(double x) { return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
}  // namespace

double injection_profile(const PhysicalParams& params, double k) {
  const double kT = params.thermal_energy();
  const double prefactor = params.gamma() * kT / (4.0 * units::kPi * units::kPi);
  const double kinetic = params.kinetic_scale() * k * k;
  return prefactor * log1p_exp((params.fermi_level - kinetic) / kT);
}

double dispersion(const PhysicalParams& params, double k, double bias) {
  const double kinetic = params.kinetic_scale() * k * k;
  return k >= 0.0 ? kinetic : kinetic - bias;
}

ResonantFrequencies resonant_frequencies(const PhysicalParams& params, double energy, double bias) {
  const double g = params.gamma();
  return {-std::sqrt(std::max(0.0, g * (energy + bias))), std::sqrt(std::max(0.0, g * energy))};
}

namespace {
// Exact integral over [a, b] of the piecewise linear interpolant of value(j).
template <class T, class Nodal>
T integrate_nodal(const Nodal& value, const SpatialGrid& grid, double a, double b) {
  const double dx = grid.dx();
  a = std::clamp(a, 0.0, grid.L);
  b = std::clamp(b, 0.0, grid.L);
  if (b <= a) return T{};
  T total{};
  const int first = std::min(static_cast<int>(std::floor(a / dx)), grid.J - 1);
  const int last = std::min(static_cast<int>(std::ceil(b / dx)), grid.J);
  for (int j = first; j < last; ++j) {
    const double lo = std::max(a, grid.x(j));
    const double hi = std::min(b, grid.x(j + 1));
    if (hi <= lo) continue;
    const double s0 = (lo - grid.x(j)) / dx;
    const double s1 = (hi - grid.x(j)) / dx;
    const T v0 = value(j);
    const T v1 = value(j + 1);
    total += 0.5 * ((v0 + (v1 - v0) * s0) + (v0 + (v1 - v0) * s1)) * (hi - lo);
  }
  return total;
}

template <class T>
void check_length(std::span<const T> f, const SpatialGrid& grid) {
  if (static_cast<int>(f.size()) != grid.nodes()) throw ModelError("field length does not match grid");
}
}  // namespace

double integrate_interval(std::span<const double> values, const SpatialGrid& grid, double a, double b) {
  check_length(values, grid);
  return integrate_nodal<double>([&](int j) { return values[j]; }, grid, a, b);
}

cplx integrate_interval(std::span<const cplx> values, const SpatialGrid& grid, double a, double b) {
  check_length(values, grid);
  return integrate_nodal<cplx>([&](int j) { return values[j]; }, grid, a, b);
}

cplx inner_product(std::span<const cplx> f, std::span<const cplx> g, const SpatialGrid& grid, double a,
                   double b) {
  check_length(f, grid);
  check_length(g, grid);
  return integrate_nodal<cplx>([&](int j) { return f[j] * std::conj(g[j]); }, grid, a, b);
}

double l2_norm(std::span<const cplx> f, const SpatialGrid& grid) {
  check_length(f, grid);
  return std::sqrt(integrate_nodal<double>([&](int j) { return std::norm(f[j]); }, grid, 0.0, grid.L));
}

std::string format_sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

}  // namespace rtd
