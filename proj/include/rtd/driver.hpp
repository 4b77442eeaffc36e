#pragma once

// Run configuration, orchestration of stationary and transient runs, and the
// on-disk artifacts (tab separated tables plus a JSON manifest).
//
// Config values are kept as written (nm, eV, K, J, m^-3, s) so that a config
// echoed into a manifest reads back bit for bit; conversion to internal units
// happens in device_setup().

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtd/oma_transient.hpp"
#include "rtd/stationary.hpp"
#include "rtd/transient.hpp"

namespace rtd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Engine { Direct, Oma, Reference };

std::string to_string(Engine e);
Engine engine_from_string(const std::string& name);

struct GeometryConfig {
  double L = 135.0;  // nm
  double a1 = 50.0, a2 = 60.0, a3 = 65.0, b3 = 70.0, b2 = 75.0, b1 = 85.0;
  double v0 = 0.3;  // eV

  bool operator==(const GeometryConfig&) const = default;
};

struct PhysicsConfig {
  double relative_mass = 0.067;
  double relative_permittivity = 11.44;
  double temperature = 300.0;    // K
  double fermi_level = 6.7097e-21;  // J

  bool operator==(const PhysicsConfig&) const = default;
};

struct DopingConfig {
  double nD1 = 1e24;  // m^-3
  double nD2 = 5e21;  // m^-3

  bool operator==(const DopingConfig&) const = default;
};

struct MeshConfig {
  int J = 299;
  int P_stationary = 50;  // OMA frequency intervals; direct base mesh is separate
  int P = 300;            // transient fine mesh
  int P_coarse = 150;     // transient OMA non-resonant mesh
  double kM = 0.0;        // nm^-1, <= 0 selects the Fermi-Dirac cutoff
  double dt = 1e-15;      // s
  double final_time = 2e-12;  // s

  bool operator==(const MeshConfig&) const = default;
};

struct BiasConfig {
  std::string mode = "step";
  double initial = 0.0;  // eV
  double final = 0.1;    // eV
  double t0 = 1e-12;     // s, ramp duration

  bool operator==(const BiasConfig&) const = default;
};

struct StationaryConfig {
  double tolerance = 1e-15;
  int max_iterations = 200;
  double v_ref = 0.0;  // eV, <= 0 selects k_B T
  int direct_base_intervals = 800;
  int reference_intervals = 4000;
  int points_per_halfwidth = 20;
  double grading = 1.5;
  // cap for the uniform-mesh stationary state that starts a direct transient
  int initial_state_max_iterations = 2000;

  bool operator==(const StationaryConfig&) const = default;
};

struct TransientConfig {
  int record_every = 10;
  std::vector<double> scan_times = {1e-13, 2e-12};  // s
  int snapshots = 0;  // extra k-scans evenly spaced over the run
  std::string phase_rule = "cayley";

  bool operator==(const TransientConfig&) const = default;
};

struct RunConfig {
  GeometryConfig geometry;
  PhysicsConfig physics;
  DopingConfig doping;
  MeshConfig mesh;
  BiasConfig bias;
  Engine engine = Engine::Oma;
  StationaryConfig stationary;
  TransientConfig transient;
  std::string output = "out";
  std::string cache = ".rtd-cache";

  /// Internal-unit device with the stationary grid.
  DeviceSetup device_setup() const;
  BiasSchedule bias_schedule() const;
  int steps() const;
  /// Checks geometry, physics and mesh; throws ConfigError naming the broken rule.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

nlohmann::ordered_json to_json(const RunConfig& cfg);
/// Strict: unknown keys and ill-typed values raise ConfigError with their path.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig ingest_config(const std::filesystem::path& path);
/// Writes the config alone as JSON.
void write_config(const RunConfig& cfg, const std::filesystem::path& path);
/// FNV-1a of the serialized config, hex.
std::string config_hash(const RunConfig& cfg);

struct ResonanceRow {
  double bias = 0.0;
  int gummel_iterations = 0;
  double dirichlet_energy = 0.0;
  double energy = 0.0;
  double width = 0.0;
  int newton_iterations = 0;
};

/// Dirichlet energy on (a2, b2) and first resonance of U(bias) + V.
ResonanceRow resonance_row(const DeviceSetup& dev, std::span<const double> v, double bias, int gummel_iterations,
                           const NewtonOptions& newton = {});

struct StationaryArtifacts {
  RunConfig config;
  double bias = 0.0;
  SpatialGrid grid;
  RealField potential, density;
  std::vector<double> trace;  // e^1 .. e^l
  bool converged = false;
  ResonanceRow row;
  int frequency_points = 0;  // mesh nodes at the last density evaluation
  long long schrodinger_solves = 0;
  std::vector<int> newton_iterations;  // per Gummel iteration, OMA only
  double wall_seconds = 0.0;
  bool from_cache = false;
  bool continued_from_zero_bias = false;
};

struct StationaryRequest {
  double bias = 0.0;
  const RealField* warm_start = nullptr;
  // overrides for the initial states of transient runs
  std::optional<int> uniform_intervals;  // direct engine without refinement
  std::optional<int> oma_intervals;
  std::optional<int> max_iterations;
};

/// Gummel loop with the configured engine. Reference runs are cached under
/// cfg.cache keyed by the config hash and bias.
StationaryArtifacts run_stationary(const RunConfig& cfg, const StationaryRequest& req);
StationaryArtifacts run_stationary(const RunConfig& cfg);

struct TransientArtifacts {
  RunConfig config;
  SpatialGrid grid;
  RealField initial_potential, final_potential, final_density;
  std::vector<TransientRecord> series;
  std::vector<KScan> scans;
  long long schrodinger_solves = 0;
  long long solves_per_step = 0;
  double wall_seconds = 0.0;
  StationaryArtifacts initial_state, asymptotic_state;
  double initial_density_distance = 0.0;  // n^0 vs the stationary density, whole domain, percent
};

TransientSetup transient_setup(const RunConfig& cfg);
/// Levels at which k-scans are taken.
std::vector<int> scan_levels(const RunConfig& cfg);

/// Stationary initial state at B_I and asymptotic state at B_inf from the
/// engine matching the transient discretization, then the time loop.
/// `warm_start` seeds the stationary solve at B_I.
TransientArtifacts run_transient(const RunConfig& cfg, const RealField* warm_start = nullptr,
                                 const std::function<void(const TransientRecord&)>& progress = {});

void emit_artifacts(const StationaryArtifacts& a, const std::filesystem::path& dir);
void emit_artifacts(const TransientArtifacts& a, const std::filesystem::path& dir);
/// Potential column of a potential.tsv.
RealField load_potential(const std::filesystem::path& dir);

/// Relative L2 distance of two nodal fields over the whole grid.
double relative_l2(std::span<const double> a, std::span<const double> ref);

}  // namespace rtd
