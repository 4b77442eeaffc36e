#pragma once

// Self-consistent time loop: intermediary potential by one damped Poisson
// solve, wave evolution by an engine, density, then linear Poisson.
// The direct engine evolves every scattering state of a uniform mesh.

#include <chrono>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "rtd/cn_dtbc.hpp"
#include "rtd/core_model.hpp"
#include "rtd/poisson.hpp"
#include "rtd/resonance.hpp"
#include "rtd/scattering.hpp"
#include "rtd/stationary.hpp"

namespace rtd {

struct TransientSetup {
  DeviceSetup device;
  BiasSchedule bias;
  double dt = 1.0;  // fs
  int steps = 2000;
  int P = 300;         // fine frequency intervals
  int P_coarse = 150;  // OMA non-resonant intervals
  PhaseRule phase = PhaseRule::Cayley;
  double v_ref = 0.0;  // <= 0 selects k_B T
  PoissonNewtonOptions poisson;
  NewtonOptions newton;

  /// Step biases use the constant-exterior closure; other schedules the gauge one.
  bool gauge_closure() const { return bias.mode == BiasMode::CubicRamp; }
  double time(int l) const { return l * dt; }
  void validate() const;
};

/// Everything an engine needs to advance from t^l to t^{l+1}.
struct StepContext {
  int l = 0;
  double t_half = 0.0, t_next = 0.0;
  double bias_half = 0.0, bias_next = 0.0;
  RealField v_half;      // V^{l+1/2}
  RealField q_mid;       // U(t^{l+1/2}) + V^{l+1/2}
  RealField q_fill_mid;  // U_fill(t^{l+1/2}) + V^{l+1/2}
  double q_right_next = 0.0;  // exterior potential at x = L, level l+1
};

/// Per-frequency well charge C(t,k) and the resonant frequencies at time t.
struct KScan {
  int l = 0;
  double t = 0.0;
  FrequencyMesh k;
  RealField C, C_theta, C_lambda;  // C_theta, C_lambda empty for the direct engine
  double energy = 0.0;             // E(t)
  double k_minus = 0.0, k_plus = 0.0;
};

struct TransientRecord {
  int l = 0;
  double t = 0.0;
  double bias = 0.0;
  double charge = 0.0;    // int_{a2}^{b2} n
  double distance = 0.0;  // d^l in percent, 0 without reference
  double energy = 0.0, width = 0.0;  // z^{l-1/2}; 0 when the engine does not track it
  double well_norm_v = 0.0;          // N(t), OMA only
  double cross_term = 0.0;           // OMA only
  double mu_residual = 0.0;          // OMA only
};

class TransientEngine {
 public:
  virtual ~TransientEngine() = default;
  virtual const RealField& density() const = 0;
  virtual void advance(const StepContext& ctx) = 0;
  virtual KScan kscan(const StepContext& ctx) = 0;
  virtual void annotate(TransientRecord& rec) const = 0;
  virtual long long schrodinger_solves() const = 0;
  virtual long long boundary_work() const = 0;
};

class DirectTransient : public TransientEngine {
 public:
  DirectTransient(const TransientSetup& setup, std::span<const double> v_initial);

  const RealField& density() const override { return density_; }
  void advance(const StepContext& ctx) override;
  KScan kscan(const StepContext& ctx) override;
  void annotate(TransientRecord&) const override {}
  long long schrodinger_solves() const override { return solves_; }
  long long boundary_work() const override;

  const FrequencyMesh& mesh() const { return mesh_; }
  const std::vector<CnEvolution>& states() const { return states_; }

 private:
  TransientSetup setup_;
  FrequencyMesh mesh_;
  std::vector<double> g_;
  std::vector<CnEvolution> states_;
  DtbcKernel left_, right_;
  GaugePhase gauge_;
  RealField density_;
  Resonance resonance_;  // only refreshed for k-scans
  long long solves_ = 0;
};

struct TransientResult {
  RealField potential;
  RealField density;
  std::vector<TransientRecord> series;
  std::vector<KScan> scans;
  double wall_seconds = 0.0;
  long long solves = 0;
};

struct TransientObserver {
  const RealField* reference_density = nullptr;  // n_inf for d^l
  std::vector<int> scan_steps;                   // levels l at which to take k-scans
  int record_every = 1;
  std::function<void(const TransientRecord&)> on_record;
};

TransientResult run_transient(const TransientSetup& setup, TransientEngine& engine, RealField v_initial,
                              const TransientObserver& observer = {});

double well_charge(std::span<const double> n, const DeviceGeometry& geom, const SpatialGrid& grid);
/// 100 ||n - n_ref||_{L2(a2,b2)} / ||n_ref||_{L2(a2,b2)}
double well_distance(std::span<const double> n, std::span<const double> n_ref, const DeviceGeometry& geom,
                     const SpatialGrid& grid);
/// log int_{a2}^{b2} |psi|^2
double log_well_charge(std::span<const cplx> psi, const DeviceGeometry& geom, const SpatialGrid& grid);

/// Exterior energies of a stationary state used as initial data.
struct ExteriorEnergies {
  double left, right;
};
ExteriorEnergies exterior_energies(const TransientSetup& setup, double k);

}  // namespace rtd
