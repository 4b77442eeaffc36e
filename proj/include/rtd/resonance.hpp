#pragma once

// First resonance z = E - i Gamma/2 of -hbar^2/2m d^2/dx^2 + Q on [0, L] with
// outgoing boundary conditions, as the P1 finite element nonlinear eigenvalue
// problem M(z) u = 0, u^H u = 1, solved by a bordered Newton iteration.

#include <span>
#include <stdexcept>
#include <vector>

#include "rtd/core_model.hpp"
#include "rtd/tridiagonal.hpp"

namespace rtd {

class ResonanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Square root holomorphic off the negative imaginary axis:
/// z = rho e^{i theta}, theta in (-pi/2, 3pi/2], s(z) = sqrt(rho) e^{i theta/2}.
/// Points on the cut take the theta -> 3pi/2 limit.
cplx branch_sqrt(cplx z);

/// M(z) = M1 + s(z) M2 + s(z - Q_L) M3 - z M4.
struct FemSystem {
  SpatialGrid grid;
  Tridiagonal<double> stiffness;  // hbar^2/(2m dx) (1,-1;-1,2,-1;...)
  Tridiagonal<double> potential;  // dx (xi_j, zeta_j)
  Tridiagonal<double> mass;       // dx (1/3, 1/6; 1/6, 2/3, 1/6; ...)
  cplx corner = 0.0;              // -i hbar / sqrt(2m), the only entry of M2 and M3
  double exterior_right = 0.0;    // Q_L

  Tridiagonal<cplx> matrix(cplx z) const;
  Tridiagonal<cplx> derivative(cplx z) const;
  /// M(z) u evaluated in extended precision.
  ComplexField residual(cplx z, std::span<const cplx> u) const;
};

FemSystem assemble_fem(const PhysicalParams& params, const SpatialGrid& grid, std::span<const double> potential);

struct DirichletState {
  double energy = 0.0;
  ComplexField mode;  // zero outside (a, b), u^H u = 1
};

/// Lowest eigenpair of -hbar^2/2m d^2/dx^2 + Q on (a, b) with homogeneous
/// Dirichlet ends placed at the true positions a and b (Shortley-Weller
/// stencil next to the walls).
DirichletState dirichlet_ground_state(const PhysicalParams& params, const SpatialGrid& grid,
                                      std::span<const double> potential, double a, double b);

struct Resonance {
  cplx z = 0.0;
  ComplexField mode;  // u^H u = 1, largest nodal value real positive
  int iterations = 0;
  std::vector<double> residuals;  // ||M(z^n) u^n||_2 for n = 0..iterations
  bool floor_limited = false;     // stopped on the round-off floor above the tolerance

  double energy() const { return z.real(); }
  double width() const { return -2.0 * z.imag(); }
  /// Mode rescaled so that the trapezoid L^2 norm on [0, L] is one.
  ComplexField l2_mode(const SpatialGrid& grid) const;
};

struct NewtonOptions {
  double tolerance = 1e-15;
  int max_iterations = 50;
  bool fix_phase = true;
  // Accept a residual below this level once it stops decreasing (round-off
  // floor of large grids); 0 disables.
  double floor_tolerance = 1e-12;
};

Resonance newton_resonance(const FemSystem& sys, std::span<const cplx> u0, cplx z0,
                           const NewtonOptions& opts = {});

/// Dirichlet initialization on (a2, b2) followed by Newton.
Resonance first_resonance(const PhysicalParams& params, const SpatialGrid& grid, std::span<const double> potential,
                          double a2, double b2, const NewtonOptions& opts = {});

/// Rotates u so its largest-magnitude entry is real and positive.
void normalize_phase(ComplexField& u);

}  // namespace rtd
