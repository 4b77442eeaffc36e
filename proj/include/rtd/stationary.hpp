#pragma once

// Density engines for the stationary Gummel loop: the Direct Resolution
// (trapezoid on a resonance-refined mesh), its uniform reference variant, and
// the One Mode Approximation.

#include <span>
#include <vector>

#include "rtd/core_model.hpp"
#include "rtd/oma_stationary.hpp"
#include "rtd/poisson.hpp"
#include "rtd/resonance.hpp"
#include "rtd/scattering.hpp"

namespace rtd {

struct DeviceSetup {
  PhysicalParams params;
  DeviceGeometry geom;
  SpatialGrid grid;
  double kM = 0.0;  // <= 0 selects default_cutoff(params)

  double cutoff() const { return kM > 0 ? kM : default_cutoff(params); }
  /// U(bias) + V
  RealField total_potential(std::span<const double> v, double bias) const;
};

struct DirectOptions {
  int base_intervals = 800;
  bool refine = true;
  RefinementRule rule;
};

class DirectEngine {
 public:
  DirectEngine(DeviceSetup setup, double bias, DirectOptions opts = {}, NewtonOptions newton = {});

  RealField operator()(std::span<const double> v);

  const FrequencyMesh& mesh() const { return mesh_; }
  const std::vector<WaveField>& fields() const { return fields_; }
  const Resonance& resonance() const { return resonance_; }
  /// number of frequency nodes used at each call
  const std::vector<int>& point_history() const { return points_; }
  long long schrodinger_solves() const { return solves_; }

 private:
  DeviceSetup setup_;
  double bias_;
  DirectOptions opts_;
  NewtonOptions newton_;
  FrequencyMesh mesh_;
  std::vector<WaveField> fields_;
  Resonance resonance_;
  std::vector<int> points_;
  long long solves_ = 0;
};

class OmaEngine {
 public:
  OmaEngine(DeviceSetup setup, double bias, int intervals, NewtonOptions newton = {});

  RealField operator()(std::span<const double> v);

  const OmaDecomposition& last() const { return last_; }
  const std::vector<int>& newton_history() const { return newton_iterations_; }
  long long schrodinger_solves() const { return solves_; }
  void seed_resonance(const Resonance& r) { last_.resonance = r; seeded_ = true; }

 private:
  DeviceSetup setup_;
  double bias_;
  FrequencyMesh mesh_;
  NewtonOptions newton_;
  OmaDecomposition last_;
  bool seeded_ = false;
  std::vector<int> newton_iterations_;
  long long solves_ = 0;
};

}  // namespace rtd
