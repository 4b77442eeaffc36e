#pragma once

// Shared vocabulary of the solvers: unit system, device description, grids,
// bias schedules and the analytic external profiles.
//
// Internal units: energy in eV, length in nm, time in fs, densities in nm^-3.
// Configuration values given in SI are converted once, at ingestion.

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtd {

using cplx = std::complex<double>;
using RealField = std::vector<double>;
using ComplexField = std::vector<cplx>;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace units {
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C, also J per eV
inline constexpr double kHbar = 0.6582119569;                 // eV fs
inline constexpr double kHbar2Over2Me = 0.0380998212;         // eV nm^2, hbar^2 / 2 m_e
inline constexpr double kBoltzmann = 8.617333262e-5;          // eV / K
inline constexpr double kChargeOverEps0 = 18.095127390;       // eV nm, q^2/eps_0 with n in nm^-3
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double joule_to_ev(double j) { return j / kElementaryCharge; }
inline constexpr double ev_to_joule(double e) { return e * kElementaryCharge; }
inline constexpr double per_m3_to_per_nm3(double n) { return n * 1e-27; }
inline constexpr double per_nm3_to_per_m3(double n) { return n * 1e27; }
inline constexpr double seconds_to_fs(double s) { return s * 1e15; }
inline constexpr double fs_to_seconds(double t) { return t * 1e-15; }
}  // namespace units

/// Material and thermodynamic constants of the device.
struct PhysicalParams {
  double relative_mass = 0.067;
  double relative_permittivity = 11.44;
  double temperature = 300.0;                                  // K
  double fermi_level = units::joule_to_ev(6.7097e-21);         // eV

  double hbar() const { return units::kHbar; }
  /// hbar^2 / 2m in eV nm^2.
  double kinetic_scale() const { return units::kHbar2Over2Me / relative_mass; }
  /// 2m / hbar^2 in eV^-1 nm^-2.
  double gamma() const { return 1.0 / kinetic_scale(); }
  double thermal_energy() const { return units::kBoltzmann * temperature; }
  /// q^2 / eps in eV nm.
  double coulomb() const { return units::kChargeOverEps0 / relative_permittivity; }

  void validate() const;
};

/// Positions in nm, barrier height in eV, donor densities in nm^-3.
struct DeviceGeometry {
  double L = 135.0;
  double a1 = 50.0, a2 = 60.0, a3 = 65.0, b3 = 70.0, b2 = 75.0, b1 = 85.0;
  double v0 = 0.3;
  double nD1 = units::per_m3_to_per_nm3(1e24);
  double nD2 = units::per_m3_to_per_nm3(5e21);

  void validate() const;
};

enum class BiasMode { Step, CubicRamp, Constant };

std::string to_string(BiasMode mode);
BiasMode bias_mode_from_string(const std::string& name);

/// Applied bias as a function of time (eV, fs).
struct BiasSchedule {
  double initial = 0.0;
  double final = 0.1;
  double ramp_duration = 1000.0;  // fs, cubic mode only
  BiasMode mode = BiasMode::Step;
};

double bias_at(const BiasSchedule& sched, double t);

/// Uniform nodal grid x_j = j dx, j = 0..J.
struct SpatialGrid {
  int J = 300;
  double L = 135.0;

  SpatialGrid() = default;
  SpatialGrid(int intervals, double length);

  int nodes() const { return J + 1; }
  double dx() const { return L / J; }
  double x(int j) const { return j * dx(); }
};

struct Grids {
  SpatialGrid space;
  int P = 50;        // frequency intervals (fine mesh)
  int P_coarse = 50; // frequency intervals for the non-resonant ensemble
  double kM = 0.0;   // nm^-1
  double dt = 1.0;   // fs

  int nu() const;
  void validate(const PhysicalParams& params) const;
};

/// Default cutoff sqrt(2m (E_F + 7 k_B T)) / hbar.
double default_cutoff(const PhysicalParams& params);

/// Sorted frequency nodes k_0 < ... < k_P.
using FrequencyMesh = std::vector<double>;
FrequencyMesh uniform_mesh(double kM, int P);

/// 1 on the closed interval [a, b], tolerant to round-off at node positions.
bool in_closed(double x, double a, double b);

RealField external_potential(const DeviceGeometry& geom, const SpatialGrid& grid, double bias);
RealField filled_potential(const DeviceGeometry& geom, const SpatialGrid& grid, double bias);
RealField doping_profile(const DeviceGeometry& geom, const SpatialGrid& grid);

/// One dimensional Fermi-Dirac injection weight g(k) in nm^-2.
double injection_profile(const PhysicalParams& params, double k);

/// E_k: hbar^2 k^2/2m for k >= 0, shifted down by the bias for k < 0.
double dispersion(const PhysicalParams& params, double k, double bias);

/// Frequencies k_R^- and k_R^+ whose energy equals the resonant energy.
struct ResonantFrequencies {
  double minus;
  double plus;
};
ResonantFrequencies resonant_frequencies(const PhysicalParams& params, double energy, double bias);

/// Integral over [a, b] of the piecewise linear interpolant of nodal values.
double integrate_interval(std::span<const double> values, const SpatialGrid& grid, double a, double b);
cplx integrate_interval(std::span<const cplx> values, const SpatialGrid& grid, double a, double b);

/// Integral over [a, b] of the interpolant of f * conj(g).
cplx inner_product(std::span<const cplx> f, std::span<const cplx> g, const SpatialGrid& grid, double a,
                   double b);

/// Scientific notation for error messages.
std::string format_sci(double x);

/// Trapezoid L^2 norm over the whole grid.
double l2_norm(std::span<const cplx> f, const SpatialGrid& grid);

}  // namespace rtd
