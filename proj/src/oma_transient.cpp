#include "rtd/oma_transient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rtd {

PhaseAlignment align_phase(std::span<const cplx> u_new, std::span<const cplx> u_prev, const SpatialGrid& grid) {
  if (u_new.size() != u_prev.size()) throw ModelError("modes of different length");
  PhaseAlignment a;
  a.omega = inner_product(u_new, u_prev, grid, 0.0, grid.L);
  if (std::abs(a.omega) < 1e-8) {
    throw ResonanceError("resonant mode lost its overlap with the previous one (|omega| = " +
                         format_sci(std::abs(a.omega)) + ")");
  }
  const cplx rot = std::conj(a.omega) / std::abs(a.omega);
  a.u.resize(u_new.size());
  for (std::size_t j = 0; j < u_new.size(); ++j) a.u[j] = u_new[j] * rot;
  a.mu_residual = std::abs(inner_product(a.u, u_prev, grid, 0.0, grid.L).imag());
  return a;
}

cplx lambda_step(cplx lambda, cplx z, cplx s_now, cplx s_next, double dt, double hbar) {
  const cplx h = cplx(0.0, 0.5 * dt / hbar) * z;
  return ((1.0 - h) * lambda + 0.5 * dt * (s_now + s_next)) / (1.0 + h);
}

cplx interpolate_source(cplx overlap_coarse, double eps_coarse, double eps_target, double t, double v0,
                        double hbar) {
  return cplx(0.0, v0 / hbar) * overlap_coarse * std::polar(1.0, (eps_coarse - eps_target) * t / hbar);
}

double trapezoid_sum(std::span<const double> f, const FrequencyMesh& mesh) {
  double s = 0.0;
  for (std::size_t p = 0; p + 1 < mesh.size(); ++p) s += 0.5 * (mesh[p + 1] - mesh[p]) * (f[p] + f[p + 1]);
  return s;
}

namespace {
double final_bias(const BiasSchedule& b) { return bias_at(b, std::numeric_limits<double>::max()); }

BoundaryMode v_mode(const TransientSetup& s) {
  return s.gauge_closure() ? BoundaryMode::TimeDependent : BoundaryMode::Homogeneous;
}
}  // namespace

OmaTransient::OmaTransient(const TransientSetup& setup, std::span<const double> v_initial)
    : setup_(setup),
      scheme_(make_scheme(setup.device.params, setup.device.grid, setup.dt)),
      v_(ComplexField(setup.device.grid.nodes()), BoundaryMode::Homogeneous),
      gauge_(-setup.bias.initial) {
  setup_.validate();
  const auto& dev = setup_.device;
  const auto& grid = dev.grid;
  const double b_i = setup_.bias.initial;
  nu_ = setup_.P / setup_.P_coarse;
  fine_ = uniform_mesh(dev.cutoff(), setup_.P);
  coarse_.resize(setup_.P_coarse + 1);
  for (int p = 0; p <= setup_.P_coarse; ++p) coarse_[p] = fine_[p * nu_];

  const RealField q = dev.total_potential(v_initial, b_i);
  RealField q_fill = filled_potential(dev.geom, grid, b_i);
  for (int j = 0; j <= grid.J; ++j) q_fill[j] += v_initial[j];
  initial_ = first_resonance(dev.params, grid, q, dev.geom.a2, dev.geom.b2, setup_.newton);
  res_ = initial_;
  u_ = initial_.l2_mode(grid);
  u_prev_ = u_;

  // theta needs the stationary non-resonant state at every fine node, once
  const std::vector<WaveField> phi_nr = solve_ensemble(dev.params, grid, fine_, q_fill, b_i);
  const std::size_t nf = fine_.size();
  theta_.resize(nf);
  lambda_.assign(nf, 0.0);
  g_fine_.resize(nf);
  eps_inf_.resize(nf);
  std::vector<double> tw(nf);
  for (std::size_t p = 0; p < nf; ++p) {
    theta_[p] = rtd::theta(phi_nr[p], initial_.z, u_, grid, dev.geom);
    g_fine_[p] = injection_profile(dev.params, fine_[p]);
    eps_inf_[p] = dispersion(dev.params, fine_[p], final_bias(setup_.bias));
    tw[p] = g_fine_[p] * std::norm(theta_[p]);
  }
  theta_mass_ = trapezoid_sum(tw, fine_);

  const BoundaryMode mode = setup_.gauge_closure() ? BoundaryMode::TimeDependent : BoundaryMode::NonHomogeneous;
  nonresonant_.reserve(coarse_.size());
  g_coarse_.resize(coarse_.size());
  for (std::size_t c = 0; c < coarse_.size(); ++c) {
    const auto& f = phi_nr[c * nu_].values;
    const ExteriorEnergies ee = exterior_energies(setup_, coarse_[c]);
    nonresonant_.emplace_back(f, mode, make_nonhomogeneous(f, ee.left, ee.right, scheme_, setup_.phase));
    g_coarse_[c] = g_fine_[c * nu_];
  }
  v_ = CnEvolution(u_, v_mode(setup_));

  const double sigma_r = setup_.gauge_closure() ? 0.0 : scheme_.sigma(-final_bias(setup_.bias));
  left_ = build_kernel(0.0, scheme_.R(), setup_.steps + 1);
  right_ = build_kernel(sigma_r, scheme_.R(), setup_.steps + 1);
  assemble_density();
  initial_density_ = density_;
}

void OmaTransient::assemble_density() {
  const auto& grid = setup_.device.grid;
  const std::size_t nc = coarse_.size();
  std::vector<RealField> mod(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    mod[c].resize(grid.nodes());
    const auto& psi = nonresonant_[c].psi();
    for (int j = 0; j <= grid.J; ++j) mod[c][j] = std::norm(psi[j]);
  }
  density_ = density_trapezoid(std::span<const RealField>(mod), g_coarse_, coarse_);
  const std::size_t nf = fine_.size();
  std::vector<double> lw(nf);
  std::vector<double> cr(nf), ci(nf);
  for (std::size_t p = 0; p < nf; ++p) {
    lw[p] = g_fine_[p] * std::norm(lambda_[p]);
    const cplx c = g_fine_[p] * theta_[p] * std::conj(lambda_[p]);
    cr[p] = c.real();
    ci[p] = c.imag();
  }
  const double lambda_mass = trapezoid_sum(lw, fine_);
  const cplx cross(trapezoid_sum(cr, fine_), trapezoid_sum(ci, fine_));
  const auto& v = v_.psi();
  double nmax = 0.0, xmax = 0.0;
  for (int j = 0; j <= grid.J; ++j) {
    density_[j] += theta_mass_ * std::norm(v[j]) + lambda_mass * std::norm(u_[j]);
    nmax = std::max(nmax, density_[j]);
    xmax = std::max(xmax, std::abs(2.0 * std::real(cross * v[j] * std::conj(u_[j]))));
  }
  cross_ = nmax > 0 ? xmax / nmax : 0.0;
}

void OmaTransient::advance(const StepContext& ctx) {
  const auto& dev = setup_.device;
  const auto& grid = dev.grid;
  const double hbar = dev.params.hbar();

  // resonance of U + V at l+1/2; the first step restarts from the Dirichlet guess
  res_ = locate_resonance(dev.params, dev.geom, grid, ctx.q_mid, first_step_ ? nullptr : &res_, setup_.newton);
  first_step_ = false;
  const PhaseAlignment al = align_phase(res_.l2_mode(grid), u_prev_, grid);
  u_ = al.u;
  mu_residual_ = al.mu_residual / setup_.dt;

  const std::size_t nc = coarse_.size();
  std::vector<cplx> i_now(nc), i_next(nc);
  for (std::size_t c = 0; c < nc; ++c) i_now[c] = inner_product(nonresonant_[c].psi(), u_, grid, dev.geom.a3, dev.geom.b3);

  const CnStepOperator op_fill(scheme_, ctx.q_fill_mid, left_.s[0], right_.s[0]);
  const CnStepOperator op(scheme_, ctx.q_mid, left_.s[0], right_.s[0]);
  const cplx eps_next = setup_.gauge_closure() ? gauge_.advance(ctx.q_right_next, scheme_) : cplx(1.0);
  const int n = static_cast<int>(nc);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < n; ++c) nonresonant_[c].step(scheme_, op_fill, left_, right_, eps_next);
  v_.step(scheme_, op, left_, right_, eps_next);
  nonresonant_solves_ += n;
  ++v_solves_;

  for (std::size_t c = 0; c < nc; ++c) i_next[c] = inner_product(nonresonant_[c].psi(), u_, grid, dev.geom.a3, dev.geom.b3);
  const double t_now = setup_.time(ctx.l);
  const double t_next = ctx.t_next;
  const double v0 = dev.geom.v0;
  const int nf = static_cast<int>(fine_.size());
#pragma omp parallel for schedule(static)
  for (int p = 0; p < nf; ++p) {
    const int c = std::min(p / nu_, static_cast<int>(nc) - 1);
    const double ec = eps_inf_[c * nu_];
    const cplx s_now = interpolate_source(i_now[c], ec, eps_inf_[p], t_now, v0, hbar);
    const cplx s_next = interpolate_source(i_next[c], ec, eps_inf_[p], t_next, v0, hbar);
    lambda_[p] = lambda_step(lambda_[p], res_.z, s_now, s_next, setup_.dt, hbar);
  }
  u_prev_ = u_;
  assemble_density();
}

KScan OmaTransient::kscan(const StepContext& ctx) {
  const auto& dev = setup_.device;
  const auto& grid = dev.grid;
  KScan s;
  s.l = ctx.l + 1;
  s.t = ctx.t_next;
  s.k = fine_;
  s.energy = res_.energy();
  const ResonantFrequencies rf = resonant_frequencies(dev.params, s.energy, ctx.bias_next);
  s.k_minus = rf.minus;
  s.k_plus = rf.plus;
  const std::size_t nf = fine_.size();
  s.C.resize(nf);
  s.C_theta.resize(nf);
  s.C_lambda.resize(nf);
  RealField vm(grid.nodes()), um(grid.nodes());
  for (int j = 0; j <= grid.J; ++j) {
    vm[j] = std::norm(v_.psi()[j]);
    um[j] = std::norm(u_[j]);
  }
  const double nv = integrate_interval(vm, grid, dev.geom.a2, dev.geom.b2);
  const double nu_w = integrate_interval(um, grid, dev.geom.a2, dev.geom.b2);
  const double hbar = dev.params.hbar();
  ComplexField psi(grid.nodes());
  for (std::size_t p = 0; p < nf; ++p) {
    const std::size_t c = std::min(p / nu_, nonresonant_.size() - 1);
    const cplx shift = std::polar(1.0, (eps_inf_[c * nu_] - eps_inf_[p]) * s.t / hbar);
    const auto& nr = nonresonant_[c].psi();
    for (int j = 0; j <= grid.J; ++j) psi[j] = nr[j] * shift + theta_[p] * v_.psi()[j] + lambda_[p] * u_[j];
    s.C[p] = log_well_charge(psi, dev.geom, grid);
    s.C_theta[p] = std::log(std::max(std::norm(theta_[p]) * nv, 1e-300));
    s.C_lambda[p] = std::log(std::max(std::norm(lambda_[p]) * nu_w, 1e-300));
  }
  return s;
}

void OmaTransient::annotate(TransientRecord& rec) const {
  const auto& dev = setup_.device;
  const auto& grid = dev.grid;
  rec.energy = res_.energy();
  rec.width = res_.width();
  RealField vm(grid.nodes());
  for (int j = 0; j <= grid.J; ++j) vm[j] = std::norm(v_.psi()[j]);
  rec.well_norm_v = integrate_interval(vm, grid, dev.geom.a2, dev.geom.b2);
  rec.cross_term = cross_;
  rec.mu_residual = mu_residual_;
}

long long OmaTransient::boundary_work() const {
  long long w = v_.work();
  for (const auto& s : nonresonant_) w += s.work();
  return w;
}

}  // namespace rtd
