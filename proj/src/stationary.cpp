#include "rtd/stationary.hpp"

namespace rtd {

RealField DeviceSetup::total_potential(std::span<const double> v, double bias) const {
  RealField q = external_potential(geom, grid, bias);
  for (int j = 0; j <= grid.J; ++j) q[j] += v[j];
  return q;
}

DirectEngine::DirectEngine(DeviceSetup setup, double bias, DirectOptions opts, NewtonOptions newton)
    : setup_(std::move(setup)), bias_(bias), opts_(opts), newton_(newton) {
  if (opts_.base_intervals < 2) throw ModelError("direct engine needs at least two frequency intervals");
}

RealField DirectEngine::operator()(std::span<const double> v) {
  const RealField q = setup_.total_potential(v, bias_);
  mesh_ = uniform_mesh(setup_.cutoff(), opts_.base_intervals);
  if (opts_.refine) {
    resonance_ = locate_resonance(setup_.params, setup_.geom, setup_.grid, q,
                                  resonance_.mode.empty() ? nullptr : &resonance_, newton_);
    mesh_ = refine_near_resonance(mesh_, setup_.params, resonance_.energy(), resonance_.width(), bias_, opts_.rule);
  }
  fields_ = solve_ensemble(setup_.params, setup_.grid, mesh_, q, bias_);
  solves_ += static_cast<long long>(mesh_.size());
  points_.push_back(static_cast<int>(mesh_.size()));
  std::vector<double> g(mesh_.size());
  for (std::size_t p = 0; p < mesh_.size(); ++p) g[p] = injection_profile(setup_.params, mesh_[p]);
  return density_trapezoid(std::span<const WaveField>(fields_), g, mesh_);
}

OmaEngine::OmaEngine(DeviceSetup setup, double bias, int intervals, NewtonOptions newton)
    : setup_(std::move(setup)), bias_(bias), mesh_(uniform_mesh(setup_.cutoff(), intervals)), newton_(newton) {}

RealField OmaEngine::operator()(std::span<const double> v) {
  const bool warm = seeded_ || !last_.resonance.mode.empty();
  const Resonance guess = last_.resonance;
  last_ = oma_density(setup_.params, setup_.geom, setup_.grid, mesh_, v, bias_, warm ? &guess : nullptr, newton_);
  solves_ += static_cast<long long>(mesh_.size());
  newton_iterations_.push_back(last_.resonance.iterations);
  return last_.density;
}

}  // namespace rtd
