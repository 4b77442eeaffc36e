#pragma once

// Randomized comparison of the closed-form chi integrals with adaptive
// Gauss-Kronrod quadrature.

#include <cstdint>

namespace rtd {

struct ChiSweep {
  int cases = 0;
  double max_error0 = 0.0;  // relative to int |integrand|
  double max_error1 = 0.0;
  int failures = 0;         // cases above the tolerance
};

/// (a, b) uniform in [-5, 5]^2, (c, d) uniform in (0, 10]^2.
ChiSweep chi_sweep(int cases, std::uint64_t seed, double tolerance = 1e-10);

/// Adaptive quadrature of int_a^b x^n / ((x^2 - c)^2 + d^2) dx, n = 0 or 1,
/// split at the peaks +-sqrt(c). `scale` receives int |integrand|.
double chi_quadrature(int n, double a, double b, double c, double d, double* scale = nullptr);

}  // namespace rtd
