#include "rtd/cn_dtbc.hpp"

#include <cmath>

namespace rtd {

CnScheme make_scheme(const PhysicalParams& params, const SpatialGrid& grid, double dt) {
  if (!(dt > 0)) throw ModelError("time step must be positive");
  CnScheme s;
  s.dx = grid.dx();
  s.dt = dt;
  s.gamma = params.gamma();
  s.hbar = params.hbar();
  return s;
}

DtbcKernel build_kernel(double sigma, double R, int l_max) {
  if (l_max < 1) throw ModelError("kernel needs l_max >= 1");
  DtbcKernel k;
  k.sigma = sigma;
  k.R = R;
  const double r2 = R * R;
  const double prod = (r2 + sigma * sigma) * (r2 + (sigma + 4.0) * (sigma + 4.0));
  k.phi = std::atan2(2.0 * R * (sigma + 2.0), r2 - 4.0 * sigma - sigma * sigma);
  k.mu = (r2 + 4.0 * sigma + sigma * sigma) / std::sqrt(prod);
  if (std::abs(k.mu) > 1.0 + 1e-12) throw ModelError("DTBC kernel: |mu| > 1");
  k.alpha = cplx(0.0, 0.5) * std::pow(prod, 0.25) * std::polar(1.0, 0.5 * k.phi);
  k.s.resize(l_max + 1);
  // P_{l-2}, P_{l-1}, P_l with P_{-1} = P_{-2} = 0
  double pm2 = 0.0, pm1 = 0.0, p = 1.0;
  for (int l = 0; l <= l_max; ++l) {
    if (l == 1) {
      pm2 = 0.0;
      pm1 = 1.0;
      p = k.mu;
    } else if (l >= 2) {
      const double next = ((2.0 * l - 1.0) * k.mu * p - (l - 1.0) * pm1) / l;
      pm2 = pm1;
      pm1 = p;
      p = next;
    }
    k.s[l] = k.alpha * std::polar(1.0, -l * k.phi) * ((p - pm2) / (2.0 * l - 1.0));
  }
  k.s[0] += cplx(1.0 + 0.5 * sigma, -0.5 * R);
  k.s[1] += cplx(1.0 + 0.5 * sigma, 0.5 * R);
  return k;
}

cplx step_phase(double energy, const CnScheme& scheme, PhaseRule rule) {
  const double a = energy * scheme.dt / scheme.hbar;
  if (rule == PhaseRule::Exact) return std::polar(1.0, -a);
  return cplx(1.0, -0.5 * a) / cplx(1.0, 0.5 * a);
}

NonHomogeneousData make_nonhomogeneous(std::span<const cplx> phi, double energy_left, double energy_right,
                                       const CnScheme& scheme, PhaseRule rule) {
  const std::size_t n = phi.size();
  if (n < 3) throw ModelError("initial state needs at least three nodes");
  NonHomogeneousData nh;
  nh.phi0 = phi[0];
  nh.phi1 = phi[1];
  nh.phiJm1 = phi[n - 2];
  nh.phiJ = phi[n - 1];
  nh.rho_left = step_phase(energy_left, scheme, rule);
  nh.rho_right = step_phase(energy_right, scheme, rule);
  return nh;
}

CnStepOperator::CnStepOperator(const CnScheme& scheme, std::span<const double> q_mid, cplx s0_left,
                               cplx s0_right)
    : q_(q_mid.begin(), q_mid.end()), lu_([&] {
        const std::size_t n = q_mid.size();
        if (n < 3) throw ModelError("Crank-Nicolson grid needs at least three nodes");
        Tridiagonal<cplx> a(n);
        const double w = scheme.w();
        const double R = scheme.R();
        a.diag[0] = -s0_left;
        a.upper[0] = 1.0;
        for (std::size_t j = 1; j + 1 < n; ++j) {
          a.lower[j] = 1.0;
          a.diag[j] = cplx(-2.0 + w * q_mid[j], R);
          a.upper[j] = 1.0;
        }
        a.lower[n - 1] = 1.0;
        a.diag[n - 1] = -s0_right;
        return PivotedTridiagonalLU<cplx>(a);
      }()) {}

cplx GaugePhase::advance(double q_next, const CnScheme& scheme) {
  angle_ += 0.5 * (q_last_ + q_next) * scheme.dt / scheme.hbar;
  q_last_ = q_next;
  eps_ = std::polar(1.0, angle_);
  return eps_;
}

CnEvolution::CnEvolution(ComplexField psi0, BoundaryMode mode, std::optional<NonHomogeneousData> nh)
    : psi_(std::move(psi0)), mode_(mode), nh_(nh) {
  if (psi_.size() < 3) throw ModelError("Crank-Nicolson state needs at least three nodes");
  if (mode_ == BoundaryMode::NonHomogeneous && !nh_) {
    throw ModelError("non-homogeneous boundary mode needs the initial exterior data");
  }
  if (mode_ == BoundaryMode::Homogeneous && nh_) {
    throw ModelError("homogeneous boundary mode takes no exterior data");
  }
  rhs_.resize(psi_.size());
}

void CnEvolution::step(const CnScheme& scheme, const CnStepOperator& op, const DtbcKernel& left,
                       const DtbcKernel& right, cplx gauge_next) {
  const std::size_t n = psi_.size();
  if (op.potential().size() != n) throw ModelError("step operator does not match the state length");
  const int next = steps_ + 1;  // level being computed
  if (left.l_max() < next || right.l_max() < next) throw ModelError("DTBC kernel shorter than the run");
  const auto& sl = left.s;
  const auto& sr = right.s;
  const double w = scheme.w();
  const double R = scheme.R();

  for (std::size_t j = 1; j + 1 < n; ++j) {
    rhs_[j] = -psi_[j - 1] + cplx(2.0 - w * op.potential()[j], R) * psi_[j] - psi_[j + 1];
  }

  // sum_{k=1}^{l} s^{l+1-k} h^k
  cplx conv_left = 0.0, conv_right = 0.0;
  for (int k = 1; k < next; ++k) {
    conv_left += sl[next - k] * hist_left_[k - 1];
    conv_right += sr[next - k] * hist_right_[k - 1];
  }
  work_ += 2 * static_cast<long long>(next - 1);

  cplx b_left = conv_left - psi_[1];
  cplx b_right;
  if (mode_ == BoundaryMode::TimeDependent) {
    b_right = conv_right - gauge_ * psi_[n - 2];
  } else {
    b_right = conv_right - psi_[n - 2];
  }
  if (nh_) {
    // sum_{k=1}^{n} s^{n-k} rho^k = rho^n sum_{m<n} s^m rho^{-m}
    const double th_l = std::arg(nh_->rho_left);
    const double th_r = std::arg(nh_->rho_right);
    acc_left_ += sl[next - 1] * std::polar(1.0, -(next - 1) * th_l);
    acc_right_ += sr[next - 1] * std::polar(1.0, -(next - 1) * th_r);
    const cplx rl_n = std::polar(1.0, next * th_l), rr_n = std::polar(1.0, next * th_r);
    const cplx rl_p = std::polar(1.0, (next - 1) * th_l), rr_p = std::polar(1.0, (next - 1) * th_r);
    b_left += -nh_->phi0 * rl_n * acc_left_ + nh_->phi1 * rl_p * (1.0 + nh_->rho_left);
    b_right += -nh_->phiJ * rr_n * acc_right_ + nh_->phiJm1 * rr_p * (1.0 + nh_->rho_right);
  }
  if (mode_ == BoundaryMode::TimeDependent) b_right /= gauge_next;
  rhs_[0] = b_left;
  rhs_[n - 1] = b_right;

  op.lu().solve_in_place(rhs_);
  psi_.swap(rhs_);
  ++solves_;
  ++work_;
  steps_ = next;
  hist_left_.push_back(psi_[0]);
  if (mode_ == BoundaryMode::TimeDependent) {
    hist_right_.push_back(gauge_next * psi_[n - 1]);
    gauge_ = gauge_next;
  } else {
    hist_right_.push_back(psi_[n - 1]);
  }
}

double discrete_norm(std::span<const cplx> psi, double dx) {
  const std::size_t n = psi.size();
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += (j == 0 || j + 1 == n ? 0.5 : 1.0) * std::norm(psi[j]);
  return std::sqrt(s * dx);
}

}  // namespace rtd
