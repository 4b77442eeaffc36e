#pragma once

// Transient One Mode Approximation. Each wave is split as
//   Psi_k = Psi^nr_k + theta_k v + lambda_k u,
// with Psi^nr evolved on a coarse mesh in the filled potential, v the
// propagated initial resonant mode, and lambda_k driven by an ODE whose
// source is interpolated onto the fine mesh.

#include <span>
#include <vector>

#include "rtd/oma_stationary.hpp"
#include "rtd/transient.hpp"

namespace rtd {

struct PhaseAlignment {
  ComplexField u;
  cplx omega;          // overlap of the raw mode with the previous one
  double mu_residual;  // |Im int u conj(u_prev)| / dt after alignment, dt = 1
};

/// Rotates `u_new` so that int u conj(u_prev) is real and non-negative.
/// Throws ResonanceError when |omega| < 1e-8.
PhaseAlignment align_phase(std::span<const cplx> u_new, std::span<const cplx> u_prev, const SpatialGrid& grid);

/// Crank-Nicolson step of lambda' + (i/hbar) z lambda = S.
cplx lambda_step(cplx lambda, cplx z, cplx s_now, cplx s_next, double dt, double hbar);

/// Source at a fine node from the overlap of its left coarse neighbour:
/// (i/hbar) v0 I e^{(i/hbar)(eps_coarse - eps_target) t}.
cplx interpolate_source(cplx overlap_coarse, double eps_coarse, double eps_target, double t, double v0,
                        double hbar);

/// Trapezoid over the mesh of the nodal values.
double trapezoid_sum(std::span<const double> f, const FrequencyMesh& mesh);

class OmaTransient : public TransientEngine {
 public:
  OmaTransient(const TransientSetup& setup, std::span<const double> v_initial);

  const RealField& density() const override { return density_; }
  void advance(const StepContext& ctx) override;
  KScan kscan(const StepContext& ctx) override;
  void annotate(TransientRecord& rec) const override;
  /// non-resonant CN solves plus the v solves
  long long schrodinger_solves() const override { return nonresonant_solves_ + v_solves_; }
  long long boundary_work() const override;

  long long nonresonant_solves() const { return nonresonant_solves_; }
  long long v_solves() const { return v_solves_; }
  int nu() const { return nu_; }
  const FrequencyMesh& fine_mesh() const { return fine_; }
  const FrequencyMesh& coarse_mesh() const { return coarse_; }
  const ComplexField& theta() const { return theta_; }
  const ComplexField& lambda() const { return lambda_; }
  const ComplexField& v() const { return v_.psi(); }
  const ComplexField& mode() const { return u_; }
  const Resonance& initial_resonance() const { return initial_; }
  const Resonance& resonance() const { return res_; }
  /// n^0 assembled from the stationary decomposition (lambda = 0, v = u_I)
  const RealField& initial_density() const { return initial_density_; }
  double cross_term() const { return cross_; }

 private:
  void assemble_density();

  TransientSetup setup_;
  CnScheme scheme_;
  FrequencyMesh fine_, coarse_;
  int nu_ = 1;
  std::vector<double> g_fine_, g_coarse_, eps_inf_;
  std::vector<CnEvolution> nonresonant_;
  CnEvolution v_;
  ComplexField theta_, lambda_;
  Resonance initial_, res_;
  ComplexField u_, u_prev_;
  DtbcKernel left_, right_;
  GaugePhase gauge_;
  RealField density_, initial_density_;
  double theta_mass_ = 0.0;
  double cross_ = 0.0, mu_residual_ = 0.0;
  long long nonresonant_solves_ = 0, v_solves_ = 0;
  bool first_step_ = true;
};

}  // namespace rtd
