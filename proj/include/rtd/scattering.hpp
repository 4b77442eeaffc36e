#pragma once

// Stationary scattering states on [0, L] with exact transparent (Robin)
// boundary conditions, their trapezoidal density, and resonance-aware
// refinement of the frequency mesh used by the direct resolution.

#include <span>
#include <vector>

#include "rtd/core_model.hpp"

namespace rtd {

/// Generalized eigenfunction Phi_k sampled at x_0..x_J.
struct WaveField {
  double k = 0.0;
  double energy = 0.0;
  ComplexField values;
  cplx derivative_left;   // Phi'(0)
  cplx derivative_right;  // Phi'(L)
};

/// Solves -hbar^2/2m Phi'' + Q Phi = E_k Phi with the scattering conditions of
/// frequency k. Q is nodal with Q(0) the left and Q(L) = -bias the right
/// exterior value. RK4 integrates from the outgoing side with unit outgoing
/// data, then the field is rescaled to a unit incoming wave.
///
/// k = 0 carries no incoming flux; it is evaluated as the limit k -> 0+.
WaveField solve_scattering(const PhysicalParams& params, const SpatialGrid& grid, double k,
                           std::span<const double> potential, double bias);

/// Reflection and transmission amplitudes recovered from boundary values.
struct ScatteringAmplitudes {
  cplx r;
  cplx t;
  double k_in;
  double k_out;  // 0 for an evanescent exit channel
};
ScatteringAmplitudes scattering_amplitudes(const PhysicalParams& params, const SpatialGrid& grid,
                                           const WaveField& phi, double bias);

/// Solves every mesh frequency; independent tasks, output ordered by mesh.
std::vector<WaveField> solve_ensemble(const PhysicalParams& params, const SpatialGrid& grid,
                                      const FrequencyMesh& mesh, std::span<const double> potential,
                                      double bias);

/// n_j = sum over cells of the trapezoid of weight(k) * |field_k(x_j)|^2.
/// `modulus2[p][j]` holds |field|^2 at mesh node p.
RealField density_trapezoid(std::span<const RealField> modulus2, std::span<const double> weights,
                            const FrequencyMesh& mesh);

/// Convenience overload squaring wave fields.
RealField density_trapezoid(std::span<const WaveField> fields, std::span<const double> weights,
                            const FrequencyMesh& mesh);

struct RefinementRule {
  int points_per_halfwidth = 20;
  double grading = 1.5;
};

/// Inserts a locally uniform patch of spacing w_k / N around each resonant
/// frequency (w_k the half-width in k of the Lorentzian peak), graded
/// geometrically back to the local base spacing.
FrequencyMesh refine_near_resonance(const FrequencyMesh& mesh, const PhysicalParams& params, double energy,
                                    double width, double bias, const RefinementRule& rule = {});

/// Half width in k of a peak of energy width Gamma centred at k_R.
double peak_halfwidth_k(const PhysicalParams& params, double k_resonant, double width);

}  // namespace rtd
