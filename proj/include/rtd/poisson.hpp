#pragma once

// Poisson coupling: the damped (Gummel) nonlinear solve, the plain linear
// solve, and the Gummel fixed-point loop around a density engine.

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtd/core_model.hpp"

namespace rtd {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PoissonNewtonOptions {
  double tolerance = 1e-12;  // max-norm of the discrete residual, eV nm^-2
  int max_iterations = 100;
};

/// Solves -V'' = (q^2/eps) (n_old exp((V_old - V)/V_ref) - n_D), V(0) = V(L) = 0,
/// by Newton on the three-point finite-difference Laplacian.
RealField gummel_poisson_step(const PhysicalParams& params, const SpatialGrid& grid, std::span<const double> v_old,
                              std::span<const double> n_old, std::span<const double> n_donor, double v_ref,
                              const PoissonNewtonOptions& opts = {});

/// Solves -V'' = (q^2/eps)(n - n_D), V(0) = V(L) = 0.
RealField linear_poisson(const PhysicalParams& params, const SpatialGrid& grid, std::span<const double> n,
                         std::span<const double> n_donor);

using DensityEngine = std::function<RealField(std::span<const double> potential)>;

struct GummelOptions {
  double tolerance = 1e-15;
  int max_iterations = 200;
  double v_ref = 0.0;  // eV; <= 0 selects k_B T
  PoissonNewtonOptions newton;
};

struct GummelState {
  RealField potential;  // V^l at exit
  RealField density;    // n[V^{l-1}], the density that produced V^l
  int iterations = 0;   // l at exit
  std::vector<double> errors;  // e^1 .. e^l
  bool converged = false;
};

/// e = ||V_new - V_old||_2 / ||V_new||_2 (0 when both vanish).
double relative_change(std::span<const double> v_new, std::span<const double> v_old);

/// Raised when the Gummel loop hits its cap; carries the partial state.
class GummelDivergence : public ConvergenceError {
 public:
  GummelDivergence(const std::string& what, GummelState state) : ConvergenceError(what), state_(std::move(state)) {}
  const GummelState& state() const { return state_; }

 private:
  GummelState state_;
};

/// Runs density -> damped Poisson until e^l < tol.
GummelState gummel_loop(const PhysicalParams& params, const SpatialGrid& grid, std::span<const double> n_donor,
                        const DensityEngine& density, RealField v0, const GummelOptions& opts = {},
                        const std::function<void(int, double)>& on_iteration = {});

}  // namespace rtd
