#include "rtd/transient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rtd {

void TransientSetup::validate() const {
  device.params.validate();
  device.geom.validate();
  if (!(dt > 0)) throw ModelError("time step must be positive");
  if (steps < 1) throw ModelError("transient run needs at least one step");
  if (P < 1 || P_coarse < 1 || P % P_coarse != 0) throw ModelError("P must be a positive multiple of P'");
  const double dx = device.grid.dx();
  if (!(device.params.kinetic_scale() / (dx * dx) > 1.0)) {
    throw ModelError("stability condition hbar^2/(2m dx^2) > 1 violated");
  }
}

namespace {
double final_bias(const BiasSchedule& b) { return bias_at(b, std::numeric_limits<double>::max()); }
}  // namespace

ExteriorEnergies exterior_energies(const TransientSetup& setup, double k) {
  const double b_i = setup.bias.initial;
  const double e = dispersion(setup.device.params, k, b_i);
  if (setup.gauge_closure()) return {e, e + b_i};
  return {e, e + (b_i - final_bias(setup.bias))};
}

double well_charge(std::span<const double> n, const DeviceGeometry& geom, const SpatialGrid& grid) {
  return integrate_interval(n, grid, geom.a2, geom.b2);
}

double well_distance(std::span<const double> n, std::span<const double> n_ref, const DeviceGeometry& geom,
                     const SpatialGrid& grid) {
  RealField d2(n.size()), r2(n.size());
  for (std::size_t j = 0; j < n.size(); ++j) {
    d2[j] = (n[j] - n_ref[j]) * (n[j] - n_ref[j]);
    r2[j] = n_ref[j] * n_ref[j];
  }
  const double den = integrate_interval(r2, grid, geom.a2, geom.b2);
  if (!(den > 0)) return 0.0;
  return 100.0 * std::sqrt(integrate_interval(d2, grid, geom.a2, geom.b2) / den);
}

double log_well_charge(std::span<const cplx> psi, const DeviceGeometry& geom, const SpatialGrid& grid) {
  RealField m(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) m[j] = std::norm(psi[j]);
  return std::log(std::max(integrate_interval(m, grid, geom.a2, geom.b2), 1e-300));
}

DirectTransient::DirectTransient(const TransientSetup& setup, std::span<const double> v_initial)
    : setup_(setup), gauge_(-setup.bias.initial) {
  setup_.validate();
  const auto& dev = setup_.device;
  const CnScheme scheme = make_scheme(dev.params, dev.grid, setup_.dt);
  const double b_i = setup_.bias.initial;
  mesh_ = uniform_mesh(dev.cutoff(), setup_.P);
  const RealField q = dev.total_potential(v_initial, b_i);
  const std::vector<WaveField> fields = solve_ensemble(dev.params, dev.grid, mesh_, q, b_i);
  const BoundaryMode mode = setup_.gauge_closure() ? BoundaryMode::TimeDependent : BoundaryMode::NonHomogeneous;
  states_.reserve(mesh_.size());
  g_.resize(mesh_.size());
  for (std::size_t p = 0; p < mesh_.size(); ++p) {
    const ExteriorEnergies ee = exterior_energies(setup_, mesh_[p]);
    states_.emplace_back(fields[p].values, mode,
                         make_nonhomogeneous(fields[p].values, ee.left, ee.right, scheme, setup_.phase));
    g_[p] = injection_profile(dev.params, mesh_[p]);
  }
  const double sigma_r = setup_.gauge_closure() ? 0.0 : scheme.sigma(-final_bias(setup_.bias));
  left_ = build_kernel(0.0, scheme.R(), setup_.steps + 1);
  right_ = build_kernel(sigma_r, scheme.R(), setup_.steps + 1);
  density_ = density_trapezoid(std::span<const WaveField>(fields), g_, mesh_);
}

void DirectTransient::advance(const StepContext& ctx) {
  const auto& dev = setup_.device;
  const CnScheme scheme = make_scheme(dev.params, dev.grid, setup_.dt);
  const CnStepOperator op(scheme, ctx.q_mid, left_.s[0], right_.s[0]);
  const cplx eps_next = setup_.gauge_closure() ? gauge_.advance(ctx.q_right_next, scheme) : cplx(1.0);
  const int n = static_cast<int>(states_.size());
#pragma omp parallel for schedule(static)
  for (int p = 0; p < n; ++p) states_[p].step(scheme, op, left_, right_, eps_next);
  solves_ += n;
  std::vector<RealField> mod(states_.size());
  for (int p = 0; p < n; ++p) {
    mod[p].resize(dev.grid.nodes());
    const auto& psi = states_[p].psi();
    for (int j = 0; j <= dev.grid.J; ++j) mod[p][j] = std::norm(psi[j]);
  }
  density_ = density_trapezoid(std::span<const RealField>(mod), g_, mesh_);
}

KScan DirectTransient::kscan(const StepContext& ctx) {
  const auto& dev = setup_.device;
  resonance_ = locate_resonance(dev.params, dev.geom, dev.grid, ctx.q_mid,
                                resonance_.mode.empty() ? nullptr : &resonance_, setup_.newton);
  KScan s;
  s.l = ctx.l + 1;
  s.t = ctx.t_next;
  s.k = mesh_;
  s.energy = resonance_.energy();
  const ResonantFrequencies rf = resonant_frequencies(dev.params, s.energy, ctx.bias_next);
  s.k_minus = rf.minus;
  s.k_plus = rf.plus;
  s.C.resize(mesh_.size());
  for (std::size_t p = 0; p < mesh_.size(); ++p) s.C[p] = log_well_charge(states_[p].psi(), dev.geom, dev.grid);
  return s;
}

long long DirectTransient::boundary_work() const {
  long long w = 0;
  for (const auto& s : states_) w += s.work();
  return w;
}

TransientResult run_transient(const TransientSetup& setup, TransientEngine& engine, RealField v_initial,
                              const TransientObserver& observer) {
  setup.validate();
  const auto& dev = setup.device;
  const auto& grid = dev.grid;
  const RealField nd = doping_profile(dev.geom, grid);
  const double v_ref = setup.v_ref > 0 ? setup.v_ref : dev.params.thermal_energy();
  TransientResult out;
  RealField v = std::move(v_initial);
  auto record = [&](int l, double bias) {
    TransientRecord r;
    r.l = l;
    r.t = setup.time(l);
    r.bias = bias;
    r.charge = well_charge(engine.density(), dev.geom, grid);
    if (observer.reference_density) r.distance = well_distance(engine.density(), *observer.reference_density, dev.geom, grid);
    engine.annotate(r);
    out.series.push_back(r);
    if (observer.on_record) observer.on_record(r);
  };
  record(0, setup.bias.initial);
  const auto start = std::chrono::steady_clock::now();
  StepContext ctx;
  for (int l = 0; l < setup.steps; ++l) {
    ctx.l = l;
    ctx.t_half = (l + 0.5) * setup.dt;
    ctx.t_next = setup.time(l + 1);
    ctx.bias_half = bias_at(setup.bias, ctx.t_half);
    ctx.bias_next = bias_at(setup.bias, ctx.t_next);
    ctx.v_half = gummel_poisson_step(dev.params, grid, v, engine.density(), nd, v_ref, setup.poisson);
    ctx.q_mid = external_potential(dev.geom, grid, ctx.bias_half);
    ctx.q_fill_mid = filled_potential(dev.geom, grid, ctx.bias_half);
    for (int j = 0; j <= grid.J; ++j) {
      ctx.q_mid[j] += ctx.v_half[j];
      ctx.q_fill_mid[j] += ctx.v_half[j];
    }
    ctx.q_right_next = -ctx.bias_next;
    engine.advance(ctx);
    v = linear_poisson(dev.params, grid, engine.density(), nd);
    if (std::find(observer.scan_steps.begin(), observer.scan_steps.end(), l + 1) != observer.scan_steps.end()) {
      out.scans.push_back(engine.kscan(ctx));
    }
    const int every = std::max(1, observer.record_every);
    if ((l + 1) % every == 0 || l + 1 == setup.steps) record(l + 1, ctx.bias_next);
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.potential = std::move(v);
  out.density = engine.density();
  out.solves = engine.schrodinger_solves();
  return out;
}

}  // namespace rtd
