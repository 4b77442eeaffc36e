#pragma once

// Crank-Nicolson propagation on [0, L] closed by discrete transparent boundary
// conditions. Three closures: homogeneous (initial data supported inside the
// domain), non-homogeneous (a stationary state as initial data), and the gauge
// form for an exterior potential at x = L that changes in time.

#include <optional>
#include <span>
#include <vector>

#include "rtd/core_model.hpp"
#include "rtd/tridiagonal.hpp"

namespace rtd {

struct CnScheme {
  double dx = 0.0;
  double dt = 0.0;
  double gamma = 0.0;  // 2m / hbar^2
  double hbar = units::kHbar;

  /// 4 m dx^2 / (hbar dt)
  double R() const { return 2.0 * gamma * hbar * dx * dx / dt; }
  /// -2 m dx^2 / hbar^2
  double w() const { return -gamma * dx * dx; }
  /// 2 m dx^2 Q / hbar^2
  double sigma(double q) const { return gamma * dx * dx * q; }
};

CnScheme make_scheme(const PhysicalParams& params, const SpatialGrid& grid, double dt);

struct DtbcKernel {
  double sigma = 0.0;
  double R = 0.0;
  double phi = 0.0;
  double mu = 0.0;
  cplx alpha;
  std::vector<cplx> s;  // s^0 .. s^{l_max}

  int l_max() const { return static_cast<int>(s.size()) - 1; }
};

/// Convolution coefficients of one boundary. Legendre values come from the
/// three-term recurrence.
DtbcKernel build_kernel(double sigma, double R, int l_max);

enum class BoundaryMode { Homogeneous, NonHomogeneous, TimeDependent };

/// How the exterior phase e^{-i E dt / hbar} of a stationary state is taken.
/// Cayley uses (1 - i E dt/2hbar)/(1 + i E dt/2hbar), the factor the scheme
/// itself produces for an exterior eigenfunction of energy E.
enum class PhaseRule { Exact, Cayley };

cplx step_phase(double energy, const CnScheme& scheme, PhaseRule rule);

/// Stationary initial state seen from the exterior.
struct NonHomogeneousData {
  cplx phi0, phi1, phiJm1, phiJ;
  cplx rho_left = 1.0;   // per-step phase at x = 0 (energy E_0)
  cplx rho_right = 1.0;  // per-step phase at x = L (energy E_L)
};

NonHomogeneousData make_nonhomogeneous(std::span<const cplx> phi, double energy_left, double energy_right,
                                       const CnScheme& scheme, PhaseRule rule);

/// Tridiagonal matrix of one step. It depends only on Q^{l+1/2} and on the
/// two s^0 values, so every evolution with the same closure shares it.
class CnStepOperator {
 public:
  CnStepOperator(const CnScheme& scheme, std::span<const double> q_mid, cplx s0_left, cplx s0_right);

  const PivotedTridiagonalLU<cplx>& lu() const { return lu_; }
  std::span<const double> potential() const { return q_; }

 private:
  RealField q_;
  PivotedTridiagonalLU<cplx> lu_;
};

/// Accumulated gauge phase e^{(i/hbar) sum (Q^k_L + Q^{k+1}_L) dt / 2}.
class GaugePhase {
 public:
  explicit GaugePhase(double q_initial) : q_last_(q_initial) {}
  /// Advances with Q_L at the next time level and returns the new value.
  cplx advance(double q_next, const CnScheme& scheme);
  cplx value() const { return eps_; }

 private:
  double q_last_;
  double angle_ = 0.0;
  cplx eps_ = 1.0;
};

class CnEvolution {
 public:
  CnEvolution(ComplexField psi0, BoundaryMode mode, std::optional<NonHomogeneousData> nh = std::nullopt);

  /// Psi^l -> Psi^{l+1}. `right` is the sigma = 0 kernel in TimeDependent
  /// mode, where `gauge_next` is the gauge phase at level l+1.
  void step(const CnScheme& scheme, const CnStepOperator& op, const DtbcKernel& left, const DtbcKernel& right,
            cplx gauge_next = 1.0);

  const ComplexField& psi() const { return psi_; }
  BoundaryMode mode() const { return mode_; }
  int steps() const { return steps_; }
  /// convolution terms evaluated plus tridiagonal solves
  long long work() const { return work_; }
  long long solves() const { return solves_; }

 private:
  ComplexField psi_;
  BoundaryMode mode_;
  std::optional<NonHomogeneousData> nh_;
  std::vector<cplx> hist_left_;   // Psi^k_0, k = 1..l
  std::vector<cplx> hist_right_;  // eps^k Psi^k_J
  cplx gauge_ = 1.0;              // eps^l
  cplx acc_left_ = 0.0, acc_right_ = 0.0;  // sum_{m<l} s^m rho^{-m}
  int steps_ = 0;
  long long work_ = 0;
  long long solves_ = 0;
  ComplexField rhs_;
};

/// Discrete L^2 norm (trapezoid).
double discrete_norm(std::span<const cplx> psi, double dx);

}  // namespace rtd
