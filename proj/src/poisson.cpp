#include "rtd/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rtd/tridiagonal.hpp"

namespace rtd {

namespace {

void check(std::span<const double> f, const SpatialGrid& grid, const char* what) {
  if (static_cast<int>(f.size()) != grid.nodes()) throw ModelError(std::string(what) + " length does not match grid");
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

RealField gummel_poisson_step(const PhysicalParams& params, const SpatialGrid& grid, std::span<const double> v_old,
                              std::span<const double> n_old, std::span<const double> n_donor, double v_ref,
                              const PoissonNewtonOptions& opts) {
  check(v_old, grid, "potential");
  check(n_old, grid, "density");
  check(n_donor, grid, "doping");
  if (!(v_ref > 0)) throw ModelError("reference potential must be positive");
  const int J = grid.J;
  const int m = J - 1;  // interior unknowns
  const double inv_h2 = 1.0 / (grid.dx() * grid.dx());
  const double c = params.coulomb();
  RealField v(v_old.begin(), v_old.end());
  v[0] = v[J] = 0.0;
  std::vector<double> res(m), delta(m);
  bool polished = false;
  for (int it = 0; it <= opts.max_iterations; ++it) {
    Tridiagonal<double> jac(m);
    double rmax = 0.0;
    for (int i = 0; i < m; ++i) {
      const int j = i + 1;
      const double damped = n_old[j] * std::exp((v_old[j] - v[j]) / v_ref);
      res[i] = (2.0 * v[j] - v[j - 1] - v[j + 1]) * inv_h2 - c * (damped - n_donor[j]);
      jac.diag[i] = 2.0 * inv_h2 + c * damped / v_ref;
      jac.lower[i] = jac.upper[i] = -inv_h2;
      rmax = std::max(rmax, std::abs(res[i]));
    }
    if (!std::isfinite(rmax)) break;
    // one extra step past the tolerance removes the last quadratic error
    if (rmax < opts.tolerance && it > 0) {
      if (polished) return v;
      polished = true;
    }
    for (int i = 0; i < m; ++i) delta[i] = -res[i];
    ThomasFactorization<double>(jac).solve_in_place(delta);
    for (int i = 0; i < m; ++i) v[i + 1] += delta[i];
    if (polished && max_abs(delta) == 0.0) return v;
  }
  throw ConvergenceError("Newton for the damped Poisson equation did not converge in " +
                         std::to_string(opts.max_iterations) + " iterations");
}

RealField linear_poisson(const PhysicalParams& params, const SpatialGrid& grid, std::span<const double> n,
                         std::span<const double> n_donor) {
  check(n, grid, "density");
  check(n_donor, grid, "doping");
  const int J = grid.J;
  const int m = J - 1;
  const double inv_h2 = 1.0 / (grid.dx() * grid.dx());
  Tridiagonal<double> a(m);
  std::vector<double> rhs(m);
  for (int i = 0; i < m; ++i) {
    a.diag[i] = 2.0 * inv_h2;
    a.lower[i] = a.upper[i] = -inv_h2;
    rhs[i] = params.coulomb() * (n[i + 1] - n_donor[i + 1]);
  }
  ThomasFactorization<double>(a).solve_in_place(rhs);
  RealField v(J + 1, 0.0);
  std::copy(rhs.begin(), rhs.end(), v.begin() + 1);
  return v;
}

double relative_change(std::span<const double> v_new, std::span<const double> v_old) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < v_new.size(); ++j) {
    num += (v_new[j] - v_old[j]) * (v_new[j] - v_old[j]);
    den += v_new[j] * v_new[j];
  }
  if (num == 0.0) return 0.0;
  if (den == 0.0) return INFINITY;
  return std::sqrt(num / den);
}

GummelState gummel_loop(const PhysicalParams& params, const SpatialGrid& grid, std::span<const double> n_donor,
                        const DensityEngine& density, RealField v0, const GummelOptions& opts,
                        const std::function<void(int, double)>& on_iteration) {
  check(v0, grid, "initial potential");
  const double v_ref = opts.v_ref > 0 ? opts.v_ref : params.thermal_energy();
  GummelState st;
  st.potential = std::move(v0);
  for (int l = 1; l <= opts.max_iterations; ++l) {
    st.density = density(st.potential);
    RealField next = gummel_poisson_step(params, grid, st.potential, st.density, n_donor, v_ref, opts.newton);
    const double e = relative_change(next, st.potential);
    st.potential = std::move(next);
    st.errors.push_back(e);
    st.iterations = l;
    if (on_iteration) on_iteration(l, e);
    if (e < opts.tolerance) {
      st.converged = true;
      return st;
    }
  }
  throw GummelDivergence("Gummel iteration did not reach e < " + format_sci(opts.tolerance) + " in " +
                         std::to_string(opts.max_iterations) + " iterations (last e = " +
                         format_sci(st.errors.empty() ? 0.0 : st.errors.back()) + ")",
                         st);
}

}  // namespace rtd
