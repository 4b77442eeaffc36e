#include "rtd/scattering.hpp"

#include <algorithm>
#include <cmath>

#include "rtd/resonance.hpp"

namespace rtd {

namespace {

struct State {
  cplx f, df;
};

// One RK4 step of f'' = gamma (Q - E) f over signed step h, with the
// potential linear between q0 (start) and q1 (end).
State rk4_step(const State& s, double h, double gamma, double energy, double q0, double q1) {
  const double qm = 0.5 * (q0 + q1);
  const double c0 = gamma * (q0 - energy);
  const double cm = gamma * (qm - energy);
  const double c1 = gamma * (q1 - energy);
  const cplx k1f = s.df, k1d = c0 * s.f;
  const cplx k2f = s.df + 0.5 * h * k1d, k2d = cm * (s.f + 0.5 * h * k1f);
  const cplx k3f = s.df + 0.5 * h * k2d, k3d = cm * (s.f + 0.5 * h * k2f);
  const cplx k4f = s.df + h * k3d, k4d = c1 * (s.f + h * k3f);
  return {s.f + h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f),
          s.df + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)};
}

}  // namespace

WaveField solve_scattering(const PhysicalParams& params, const SpatialGrid& grid, double k,
                           std::span<const double> q, double bias) {
  if (static_cast<int>(q.size()) != grid.nodes()) throw ModelError("potential length does not match grid");
  for (double v : q) {
    if (!std::isfinite(v)) throw ModelError("non-finite potential passed to the scattering solver");
  }
  const int J = grid.J;
  const double dx = grid.dx();
  const double g = params.gamma();
  WaveField out;
  out.k = k;
  out.energy = dispersion(params, k, bias);
  out.values.assign(grid.nodes(), 0.0);
  if (k == 0.0) {
    // the incoming amplitude 2ik vanishes and so does the whole state
    out.derivative_left = out.derivative_right = 0.0;
    return out;
  }
  const cplx ik(0.0, k);
  if (k > 0) {
    const cplx kr = branch_sqrt(k * k + g * bias);
    State s{1.0, cplx(0.0, 1.0) * kr};
    out.values[J] = s.f;
    cplx d_right = s.df;
    for (int j = J; j > 0; --j) {
      s = rk4_step(s, -dx, g, out.energy, q[j], q[j - 1]);
      out.values[j - 1] = s.f;
    }
    const cplx scale = 2.0 * ik / (s.df + ik * s.f);
    for (auto& v : out.values) v *= scale;
    out.derivative_left = s.df * scale;
    out.derivative_right = d_right * scale;
  } else {
    const cplx kl = branch_sqrt(k * k - g * bias);
    State s{1.0, cplx(0.0, -1.0) * kl};
    out.values[0] = s.f;
    const cplx d_left = s.df;
    for (int j = 0; j < J; ++j) {
      s = rk4_step(s, dx, g, out.energy, q[j], q[j + 1]);
      out.values[j + 1] = s.f;
    }
    const cplx scale = 2.0 * ik * std::exp(ik * grid.L) / (s.df + ik * s.f);
    for (auto& v : out.values) v *= scale;
    out.derivative_left = d_left * scale;
    out.derivative_right = s.df * scale;
  }
  return out;
}

ScatteringAmplitudes scattering_amplitudes(const PhysicalParams& params, const SpatialGrid& grid,
                                           const WaveField& phi, double bias) {
  const double k = phi.k;
  const double g = params.gamma();
  ScatteringAmplitudes a{};
  a.k_in = std::abs(k);
  const cplx i(0.0, 1.0);
  if (k >= 0) {
    const cplx kr = branch_sqrt(k * k + g * bias);
    a.r = phi.values.front() - 1.0;
    a.t = phi.values.back() * std::exp(-i * kr * grid.L);
    a.k_out = kr.imag() == 0.0 ? kr.real() : 0.0;
  } else {
    const cplx kl = branch_sqrt(k * k - g * bias);
    a.r = (phi.values.back() - std::exp(i * k * grid.L)) * std::exp(i * k * grid.L);
    a.t = phi.values.front();
    a.k_out = kl.imag() == 0.0 ? kl.real() : 0.0;
  }
  return a;
}

std::vector<WaveField> solve_ensemble(const PhysicalParams& params, const SpatialGrid& grid,
                                      const FrequencyMesh& mesh, std::span<const double> q, double bias) {
  std::vector<WaveField> out(mesh.size());
  const long n = static_cast<long>(mesh.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long p = 0; p < n; ++p) out[p] = solve_scattering(params, grid, mesh[p], q, bias);
  return out;
}

RealField density_trapezoid(std::span<const RealField> modulus2, std::span<const double> weights,
                            const FrequencyMesh& mesh) {
  if (modulus2.size() != mesh.size() || weights.size() != mesh.size()) {
    throw ModelError("density_trapezoid: mesh, weights and fields differ in length");
  }
  if (mesh.empty()) return {};
  const std::size_t nx = modulus2.front().size();
  RealField n(nx, 0.0);
  for (std::size_t p = 0; p + 1 < mesh.size(); ++p) {
    if (modulus2[p].size() != nx || modulus2[p + 1].size() != nx) {
      throw ModelError("density_trapezoid: fields differ in length");
    }
    const double h = 0.5 * (mesh[p + 1] - mesh[p]);
    const double w0 = h * weights[p], w1 = h * weights[p + 1];
    for (std::size_t j = 0; j < nx; ++j) n[j] += w0 * modulus2[p][j] + w1 * modulus2[p + 1][j];
  }
  return n;
}

RealField density_trapezoid(std::span<const WaveField> fields, std::span<const double> weights,
                            const FrequencyMesh& mesh) {
  std::vector<RealField> m(fields.size());
  for (std::size_t p = 0; p < fields.size(); ++p) {
    m[p].resize(fields[p].values.size());
    for (std::size_t j = 0; j < m[p].size(); ++j) m[p][j] = std::norm(fields[p].values[j]);
  }
  return density_trapezoid(m, weights, mesh);
}

double peak_halfwidth_k(const PhysicalParams& params, double k_resonant, double width) {
  return params.gamma() * width / (4.0 * std::abs(k_resonant));
}

namespace {

FrequencyMesh refine_one(const FrequencyMesh& mesh, double kr, double w, const RefinementRule& rule) {
  if (mesh.size() < 2 || kr <= mesh.front() || kr >= mesh.back()) return mesh;
  const auto it = std::upper_bound(mesh.begin(), mesh.end(), kr);
  const double base = *it - *(it - 1);
  const double h = w / rule.points_per_halfwidth;
  if (h >= base) return mesh;
  std::vector<double> patch;
  for (int i = -rule.points_per_halfwidth; i <= rule.points_per_halfwidth; ++i) patch.push_back(kr + i * h);
  double step = h * rule.grading;
  double hi = kr + w, lo = kr - w;
  while (step < base) {
    hi += step;
    lo -= step;
    patch.push_back(hi);
    patch.push_back(lo);
    step *= rule.grading;
  }
  FrequencyMesh out;
  out.reserve(mesh.size() + patch.size());
  for (double k : mesh) {
    const bool endpoint = (k == mesh.front() || k == mesh.back());
    if (endpoint || k < lo - 0.5 * base || k > hi + 0.5 * base) out.push_back(k);
  }
  for (double k : patch) {
    if (k > mesh.front() && k < mesh.back()) out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

FrequencyMesh refine_near_resonance(const FrequencyMesh& mesh, const PhysicalParams& params, double energy,
                                    double width, double bias, const RefinementRule& rule) {
  if (!(width > 0)) throw ModelError("refinement needs a positive resonance width");
  const ResonantFrequencies kr = resonant_frequencies(params, energy, bias);
  FrequencyMesh out = mesh;
  for (double k : {kr.minus, kr.plus}) {
    if (k == 0.0) continue;
    out = refine_one(out, k, peak_halfwidth_k(params, k, width), rule);
  }
  return out;
}

}  // namespace rtd
