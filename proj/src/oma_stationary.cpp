#include "rtd/oma_stationary.hpp"

#include <algorithm>
#include <cmath>

namespace rtd {

double chi0(double a, double b, double c, double d) {
  if (a == b) return 0.0;
  // z0 = sqrt(c - i d) = p - i q with p, q > 0
  const double modulus = std::hypot(c, d);
  const double p = std::sqrt(0.5 * (modulus + c));
  const double q = d / (2.0 * p);
  const double q2 = q * q;
  // log of ((b +- p)^2 + q^2) / ((a +- p)^2 + q^2) through log1p of the exact difference
  auto log_ratio = [&](double shift) {
    const double na = (a + shift) * (a + shift) + q2;
    return std::log1p((b - a) * (b + a + 2.0 * shift) / na);
  };
  const double x = 0.5 * (log_ratio(p) - log_ratio(-p));
  const double y = std::atan2(q * (b - a), (b + p) * (a + p) + q2) - std::atan2(-q * (b - a), (b - p) * (a - p) + q2);
  return y / (4.0 * q * modulus) + x / (4.0 * p * modulus);
}

double chi1(double a, double b, double c, double d) {
  if (a == b) return 0.0;
  return std::atan2(d * (b - a) * (b + a), d * d + (b * b - c) * (a * a - c)) / (2.0 * d);
}

cplx well_overlap(std::span<const cplx> phi, std::span<const cplx> u, const SpatialGrid& grid,
                  const DeviceGeometry& geom) {
  return inner_product(phi, u, grid, geom.a3, geom.b3);
}

cplx theta(const WaveField& phi_nr, cplx z, std::span<const cplx> u, const SpatialGrid& grid,
           const DeviceGeometry& geom) {
  if (geom.v0 == 0.0) return 0.0;
  return geom.v0 * well_overlap(phi_nr.values, u, grid, geom) / (z - phi_nr.energy);
}

double resonant_weight(const PhysicalParams& params, const WaveField& phi_nr, std::span<const cplx> u,
                       const SpatialGrid& grid, const DeviceGeometry& geom) {
  const cplx overlap = well_overlap(phi_nr.values, u, grid, geom);
  return injection_profile(params, phi_nr.k) * geom.v0 * geom.v0 * std::norm(overlap);
}

double resonant_cell_integral(const PhysicalParams& params, double k0, double k1, double r0, double r1, cplx z,
                              double bias) {
  if (!(k1 > k0)) return 0.0;
  const double g = params.gamma();
  const double width = -2.0 * z.imag();
  if (!(width > 0)) throw ModelError("resonant cell integral needs a decaying resonance (Gamma > 0)");
  const double alpha = (r1 - r0) / (k1 - k0);
  const double beta = (r0 * k1 - r1 * k0) / (k1 - k0);
  const double d = g * width / 2.0;
  auto piece = [&](double lo, double hi, bool negative_branch) {
    const double c = g * (z.real() + (negative_branch ? bias : 0.0));
    return g * g * (alpha * chi1(lo, hi, c, d) + beta * chi0(lo, hi, c, d));
  };
  if (k0 < 0.0 && k1 > 0.0) return piece(k0, 0.0, true) + piece(0.0, k1, false);
  return piece(k0, k1, k1 <= 0.0);
}

Resonance locate_resonance(const PhysicalParams& params, const DeviceGeometry& geom, const SpatialGrid& grid,
                           std::span<const double> q, const Resonance* guess, const NewtonOptions& newton) {
  if (guess != nullptr && !guess->mode.empty()) {
    try {
      const FemSystem sys = assemble_fem(params, grid, q);
      Resonance r = newton_resonance(sys, guess->mode, guess->z, newton);
      if (r.width() > 0) return r;
    } catch (const ResonanceError&) {
    }
  }
  return first_resonance(params, grid, q, geom.a2, geom.b2, newton);
}

OmaDecomposition oma_density(const PhysicalParams& params, const DeviceGeometry& geom, const SpatialGrid& grid,
                             const FrequencyMesh& mesh, std::span<const double> v, double bias,
                             const Resonance* guess, const NewtonOptions& newton) {
  OmaDecomposition out;
  out.mesh = mesh;
  RealField q_fill = filled_potential(geom, grid, bias);
  RealField q = external_potential(geom, grid, bias);
  for (int j = 0; j <= grid.J; ++j) {
    q_fill[j] += v[j];
    q[j] += v[j];
  }
  out.nonresonant = solve_ensemble(params, grid, mesh, q_fill, bias);
  out.resonance = locate_resonance(params, geom, grid, q, guess, newton);
  out.mode = out.resonance.l2_mode(grid);
  const cplx z = out.resonance.z;
  const std::size_t np = mesh.size();
  std::vector<double> g(np);
  out.theta.resize(np);
  out.weight.resize(np);
  for (std::size_t p = 0; p < np; ++p) {
    g[p] = injection_profile(params, mesh[p]);
    out.theta[p] = theta(out.nonresonant[p], z, out.mode, grid, geom);
    out.weight[p] = resonant_weight(params, out.nonresonant[p], out.mode, grid, geom);
  }
  double peak = 0.0;
  out.cell_integral.resize(np > 0 ? np - 1 : 0);
  for (std::size_t p = 0; p + 1 < np; ++p) {
    out.cell_integral[p] =
        resonant_cell_integral(params, mesh[p], mesh[p + 1], out.weight[p], out.weight[p + 1], z, bias);
    peak += out.cell_integral[p];
  }
  out.density = density_trapezoid(std::span<const WaveField>(out.nonresonant), g, mesh);
  RealField cross(grid.nodes(), 0.0);
  for (int j = 0; j <= grid.J; ++j) {
    out.density[j] += peak * std::norm(out.mode[j]);
    for (std::size_t p = 0; p + 1 < np; ++p) {
      const double h = 0.5 * (mesh[p + 1] - mesh[p]);
      auto term = [&](std::size_t i) {
        return 2.0 * g[i] * std::real(out.nonresonant[i].values[j] * std::conj(out.theta[i] * out.mode[j]));
      };
      cross[j] += h * (term(p) + term(p + 1));
    }
  }
  double nmax = 0.0, cmax = 0.0;
  for (int j = 0; j <= grid.J; ++j) {
    nmax = std::max(nmax, out.density[j]);
    cmax = std::max(cmax, std::abs(cross[j]));
  }
  out.cross_term = nmax > 0 ? cmax / nmax : 0.0;
  return out;
}

}  // namespace rtd
