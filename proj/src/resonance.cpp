#include "rtd/resonance.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace rtd {

cplx branch_sqrt(cplx z) {
  const double rho = std::abs(z);
  if (rho == 0.0) return 0.0;
  double theta = std::arg(z);  // (-pi, pi]
  if (theta <= -0.5 * units::kPi) theta += 2.0 * units::kPi;
  return std::polar(std::sqrt(rho), 0.5 * theta);
}

Tridiagonal<cplx> FemSystem::matrix(cplx z) const {
  const std::size_t n = stiffness.size();
  Tridiagonal<cplx> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.lower[i] = stiffness.lower[i] + potential.lower[i] - z * mass.lower[i];
    m.diag[i] = stiffness.diag[i] + potential.diag[i] - z * mass.diag[i];
    m.upper[i] = stiffness.upper[i] + potential.upper[i] - z * mass.upper[i];
  }
  m.diag[0] += branch_sqrt(z) * corner;
  m.diag[n - 1] += branch_sqrt(z - exterior_right) * corner;
  return m;
}

Tridiagonal<cplx> FemSystem::derivative(cplx z) const {
  const std::size_t n = stiffness.size();
  Tridiagonal<cplx> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.lower[i] = -mass.lower[i];
    d.diag[i] = -mass.diag[i];
    d.upper[i] = -mass.upper[i];
  }
  d.diag[0] += corner / (2.0 * branch_sqrt(z));
  d.diag[n - 1] += corner / (2.0 * branch_sqrt(z - exterior_right));
  return d;
}

ComplexField FemSystem::residual(cplx z, std::span<const cplx> u) const {
  using lcplx = std::complex<long double>;
  const std::size_t n = stiffness.size();
  const lcplx zl(z.real(), z.imag());
  const cplx s_left = branch_sqrt(z) * corner;
  const cplx s_right = branch_sqrt(z - exterior_right) * corner;
  ComplexField r(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto entry = [&](long double k, long double q, long double w) { return lcplx(k + q) - zl * w; };
    lcplx acc = entry(stiffness.diag[i], potential.diag[i], mass.diag[i]) * lcplx(u[i]);
    if (i > 0) acc += entry(stiffness.lower[i], potential.lower[i], mass.lower[i]) * lcplx(u[i - 1]);
    if (i + 1 < n) acc += entry(stiffness.upper[i], potential.upper[i], mass.upper[i]) * lcplx(u[i + 1]);
    if (i == 0) acc += lcplx(s_left) * lcplx(u[0]);
    if (i == n - 1) acc += lcplx(s_right) * lcplx(u[n - 1]);
    r[i] = cplx(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
  }
  return r;
}

FemSystem assemble_fem(const PhysicalParams& params, const SpatialGrid& grid, std::span<const double> q) {
  if (static_cast<int>(q.size()) != grid.nodes()) throw ModelError("potential length does not match grid");
  const int n = grid.nodes();
  const int J = grid.J;
  const double dx = grid.dx();
  const double ks = params.kinetic_scale() / dx;
  FemSystem sys;
  sys.grid = grid;
  sys.stiffness = Tridiagonal<double>(n);
  sys.potential = Tridiagonal<double>(n);
  sys.mass = Tridiagonal<double>(n);
  for (int j = 0; j < n; ++j) {
    const bool end = (j == 0 || j == J);
    sys.stiffness.diag[j] = end ? ks : 2.0 * ks;
    sys.mass.diag[j] = dx * (end ? 1.0 / 3.0 : 2.0 / 3.0);
    if (j > 0) {
      sys.stiffness.lower[j] = -ks;
      sys.mass.lower[j] = dx / 6.0;
      sys.potential.lower[j] = dx * (q[j - 1] + q[j]) / 12.0;
    }
    if (j < J) {
      sys.stiffness.upper[j] = -ks;
      sys.mass.upper[j] = dx / 6.0;
      sys.potential.upper[j] = dx * (q[j] + q[j + 1]) / 12.0;
    }
  }
  sys.potential.diag[0] = dx * (q[0] / 4.0 + q[1] / 12.0);
  sys.potential.diag[J] = dx * (q[J] / 4.0 + q[J - 1] / 12.0);
  for (int j = 1; j < J; ++j) sys.potential.diag[j] = dx * ((q[j - 1] + q[j + 1]) / 12.0 + q[j] / 2.0);
  sys.corner = cplx(0.0, -std::sqrt(params.kinetic_scale()));
  sys.exterior_right = q[J];
  return sys;
}

DirichletState dirichlet_ground_state(const PhysicalParams& params, const SpatialGrid& grid,
                                      std::span<const double> q, double a, double b) {
  constexpr double tol = 1e-9;
  const double dx = grid.dx();
  std::vector<int> nodes;
  for (int j = 0; j <= grid.J; ++j) {
    const double x = grid.x(j);
    if (x > a + tol && x < b - tol) nodes.push_back(j);
  }
  const int n = static_cast<int>(nodes.size());
  if (n < 2) throw ResonanceError("Dirichlet interval contains fewer than two grid nodes");
  const double ks = params.kinetic_scale();
  // Shortley-Weller stencil: unequal spacing at the wall-adjacent nodes.
  std::vector<double> diag(n), up(n - 1), lo(n - 1);
  for (int i = 0; i < n; ++i) {
    const double x = grid.x(nodes[i]);
    const double hl = i == 0 ? x - a : dx;
    const double hr = i == n - 1 ? b - x : dx;
    const double c = 2.0 * ks / (hl + hr);
    diag[i] = c * (1.0 / hl + 1.0 / hr) + q[nodes[i]];
    if (i + 1 < n) up[i] = -c / hr;
    if (i > 0) lo[i - 1] = -c / hl;
  }
  // similarity transform to a symmetric tridiagonal matrix
  Eigen::VectorXd d(n), e(n - 1), scale(n);
  scale[0] = 1.0;
  for (int i = 0; i < n; ++i) d[i] = diag[i];
  for (int i = 0; i + 1 < n; ++i) {
    e[i] = -std::sqrt(up[i] * lo[i]);
    scale[i + 1] = scale[i] * std::sqrt(up[i] / lo[i]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw ResonanceError("Dirichlet eigensolve failed");
  const Eigen::VectorXd y = solver.eigenvectors().col(0);
  DirichletState out;
  out.energy = solver.eigenvalues()[0];
  out.mode.assign(grid.nodes(), 0.0);
  double norm2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = y[i] / scale[i];
    out.mode[nodes[i]] = v;
    norm2 += v * v;
  }
  const double sign = std::accumulate(out.mode.begin(), out.mode.end(), 0.0,
                                      [](double s, cplx v) { return s + v.real(); }) < 0
                          ? -1.0
                          : 1.0;
  for (auto& v : out.mode) v *= sign / std::sqrt(norm2);
  return out;
}

void normalize_phase(ComplexField& u) {
  const auto it = std::max_element(u.begin(), u.end(), [](cplx x, cplx y) { return std::abs(x) < std::abs(y); });
  if (it == u.end() || std::abs(*it) == 0.0) return;
  const cplx rot = std::conj(*it) / std::abs(*it);
  for (auto& v : u) v *= rot;
}

ComplexField Resonance::l2_mode(const SpatialGrid& grid) const {
  ComplexField out = mode;
  const double n = l2_norm(out, grid);
  for (auto& v : out) v /= n;
  return out;
}

namespace {
double euclidean_norm(std::span<const cplx> v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) {  // a^H b
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}
}  // namespace

Resonance newton_resonance(const FemSystem& sys, std::span<const cplx> u0, cplx z0, const NewtonOptions& opts) {
  const std::size_t n = sys.stiffness.size();
  if (u0.size() != n) throw ResonanceError("initial mode length does not match the FEM system");
  ComplexField u(u0.begin(), u0.end());
  const double norm0 = euclidean_norm(u);
  if (!(norm0 > 0)) throw ResonanceError("initial mode is zero");
  for (auto& v : u) v /= norm0;
  cplx z = z0;
  Resonance res;
  for (int it = 0;; ++it) {
    const ComplexField r = sys.residual(z, u);
    const double rnorm = euclidean_norm(r);
    if (!std::isfinite(rnorm)) throw ResonanceError("Newton iteration produced a non-finite residual");
    res.residuals.push_back(rnorm);
    if (rnorm < opts.tolerance) {
      res.iterations = it;
      break;
    }
    if (it > 0 && rnorm < opts.floor_tolerance && rnorm > 0.5 * res.residuals[it - 1]) {
      res.iterations = it;
      res.floor_limited = true;
      break;
    }
    if (it >= opts.max_iterations) {
      throw ResonanceError("Newton iteration for the resonance did not converge in " +
                           std::to_string(opts.max_iterations) + " iterations (residual " +
                           format_sci(rnorm) + ")");
    }
    // Bordered system [M, M'u; u^H, 0][du; dz] = [-r; 0] by block elimination.
    const Tridiagonal<cplx> m = sys.matrix(z);
    const ComplexField c = sys.derivative(z).apply(u);
    ComplexField x1(n), x2(c);
    for (std::size_t i = 0; i < n; ++i) x1[i] = -r[i];
    try {
      const PivotedTridiagonalLU<cplx> lu(m);
      lu.solve_in_place(x1);
      lu.solve_in_place(x2);
    } catch (const std::runtime_error&) {
      throw ResonanceError("bordered Newton matrix is singular");
    }
    const cplx denom = dot_conj(u, x2);
    if (std::abs(denom) == 0.0 || !std::isfinite(std::abs(denom))) {
      throw ResonanceError("bordered Newton matrix is singular");
    }
    const cplx dz = dot_conj(u, x1) / denom;
    for (std::size_t i = 0; i < n; ++i) u[i] += x1[i] - dz * x2[i];
    z += dz;
    const double nu = euclidean_norm(u);
    for (auto& v : u) v /= nu;
  }
  if (opts.fix_phase) normalize_phase(u);
  res.z = z;
  res.mode = std::move(u);
  return res;
}

Resonance first_resonance(const PhysicalParams& params, const SpatialGrid& grid, std::span<const double> q,
                          double a2, double b2, const NewtonOptions& opts) {
  const DirichletState init = dirichlet_ground_state(params, grid, q, a2, b2);
  const FemSystem sys = assemble_fem(params, grid, q);
  return newton_resonance(sys, init.mode, init.energy, opts);
}

}  // namespace rtd
