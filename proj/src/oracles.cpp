#include "rtd/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rtd/oma_stationary.hpp"

namespace rtd {

double chi_quadrature(int n, double a, double b, double c, double d, double* scale) {
  const double sign = a <= b ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  std::vector<double> cuts = {lo};
  for (double p : {-std::sqrt(c), std::sqrt(c)}) {
    if (p > lo && p < hi) cuts.push_back(p);
  }
  if (n == 1 && lo < 0.0 && hi > 0.0) cuts.push_back(0.0);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  auto f = [&](double x) {
    const double u = x * x - c;
    return (n == 0 ? 1.0 : x) / (u * u + d * d);
  };
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  double total = 0.0, abs_total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double piece = Quad::integrate(f, cuts[i], cuts[i + 1], 20, 1e-12);
    total += piece;
    abs_total += std::abs(piece);
  }
  if (scale) *scale = abs_total;
  return sign * total;
}

ChiSweep chi_sweep(int cases, std::uint64_t seed, double tolerance) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ends(-5.0, 5.0), unit(0.0, 1.0);
  ChiSweep s;
  s.cases = cases;
  for (int i = 0; i < cases; ++i) {
    const double a = ends(rng), b = ends(rng);
    const double c = 10.0 * (1.0 - unit(rng));
    const double d = 10.0 * (1.0 - unit(rng));
    double s0 = 0.0, s1 = 0.0;
    const double q0 = chi_quadrature(0, a, b, c, d, &s0);
    const double q1 = chi_quadrature(1, a, b, c, d, &s1);
    const double e0 = s0 > 0 ? std::abs(chi0(a, b, c, d) - q0) / s0 : 0.0;
    const double e1 = s1 > 0 ? std::abs(chi1(a, b, c, d) - q1) / s1 : 0.0;
    s.max_error0 = std::max(s.max_error0, e0);
    s.max_error1 = std::max(s.max_error1, e1);
    if (!(e0 < tolerance) || !(e1 < tolerance)) ++s.failures;
  }
  return s;
}

}  // namespace rtd
