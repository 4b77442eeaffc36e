#pragma once

// Stationary One Mode Approximation: each scattering state is split into a
// non-resonant part (well filled to barrier height) and theta_k u_I, and the
// sharp |theta_k|^2 peak is integrated in closed form cell by cell.

#include <optional>
#include <span>
#include <vector>

#include "rtd/core_model.hpp"
#include "rtd/resonance.hpp"
#include "rtd/scattering.hpp"

namespace rtd {

/// chi^0(a,b,c,d) = int_a^b dx / ((x^2-c)^2 + d^2),  c > 0, d > 0.
double chi0(double a, double b, double c, double d);
/// chi^1(a,b,c,d) = int_a^b x dx / ((x^2-c)^2 + d^2).
double chi1(double a, double b, double c, double d);

/// int_{a3}^{b3} Phi conj(u) dx.
cplx well_overlap(std::span<const cplx> phi, std::span<const cplx> u, const SpatialGrid& grid,
                  const DeviceGeometry& geom);

/// theta_k = v0 / (z - E_k) int_{a3}^{b3} Phi^nr_k conj(u) dx, u L2-normalized.
cplx theta(const WaveField& phi_nr, cplx z, std::span<const cplx> u, const SpatialGrid& grid,
           const DeviceGeometry& geom);

/// R_k = g(k) v0^2 |int_{a3}^{b3} Phi^nr_k conj(u)|^2.
double resonant_weight(const PhysicalParams& params, const WaveField& phi_nr, std::span<const cplx> u,
                       const SpatialGrid& grid, const DeviceGeometry& geom);

/// Exact integral over [k0, k1] of (alpha k + beta) / |E_k - z|^2, where
/// alpha k + beta interpolates R linearly between (k0, r0) and (k1, r1).
/// Cells straddling k = 0 are split there, keeping the same interpolant.
double resonant_cell_integral(const PhysicalParams& params, double k0, double k1, double r0, double r1, cplx z,
                              double bias);

struct OmaDecomposition {
  FrequencyMesh mesh;
  std::vector<WaveField> nonresonant;
  Resonance resonance;
  ComplexField mode;        // L2-normalized resonant mode
  ComplexField theta;       // per mesh node
  RealField weight;         // R_k per mesh node
  RealField cell_integral;  // J_p per cell
  RealField density;
  double cross_term = 0.0;  // max_j of the neglected cross contribution / max_j n_j
};

/// Non-resonant ensemble on U_fill + V, resonance of U + V (warm started from
/// `guess` when given, else from the Dirichlet ground state on (a2, b2)), and
/// n_j = sum_p trapezoid(g |Phi^nr|^2) + (sum_p J_p) |u_j|^2.
OmaDecomposition oma_density(const PhysicalParams& params, const DeviceGeometry& geom, const SpatialGrid& grid,
                             const FrequencyMesh& mesh, std::span<const double> v, double bias,
                             const Resonance* guess = nullptr, const NewtonOptions& newton = {});

/// Resonance of the given potential; warm start first, Dirichlet start as fallback.
Resonance locate_resonance(const PhysicalParams& params, const DeviceGeometry& geom, const SpatialGrid& grid,
                           std::span<const double> q, const Resonance* guess, const NewtonOptions& newton = {});

}  // namespace rtd
