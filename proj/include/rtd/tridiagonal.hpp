#pragma once

// Tridiagonal solvers shared by the Poisson, resonance and Crank-Nicolson code.

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace rtd {

/// Row i reads lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]
/// (lower[0] and upper[n-1] are ignored).
template <class T>
struct Tridiagonal {
  std::vector<T> lower, diag, upper;

  explicit Tridiagonal(std::size_t n = 0) : lower(n), diag(n), upper(n) {}
  std::size_t size() const { return diag.size(); }

  std::vector<T> apply(std::span<const T> x) const {
    const std::size_t n = size();
    std::vector<T> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      T v = diag[i] * x[i];
      if (i > 0) v += lower[i] * x[i - 1];
      if (i + 1 < n) v += upper[i] * x[i + 1];
      y[i] = v;
    }
    return y;
  }
};

/// Thomas algorithm without pivoting; the factorization is reusable for many
/// right-hand sides. Intended for diagonally dominant systems.
template <class T>
class ThomasFactorization {
 public:
  ThomasFactorization() = default;
  explicit ThomasFactorization(const Tridiagonal<T>& a) { factor(a); }

  void factor(const Tridiagonal<T>& a) {
    const std::size_t n = a.size();
    lower_ = a.lower;
    upper_.assign(n, T{});
    inv_pivot_.assign(n, T{});
    T pivot = a.diag[0];
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) pivot = a.diag[i] - a.lower[i] * upper_[i - 1];
      if (std::abs(pivot) == 0.0) throw std::runtime_error("singular tridiagonal system");
      inv_pivot_[i] = T(1) / pivot;
      if (i + 1 < n) upper_[i] = a.upper[i] * inv_pivot_[i];
    }
  }

  void solve_in_place(std::span<T> b) const {
    const std::size_t n = inv_pivot_.size();
    b[0] *= inv_pivot_[0];
    for (std::size_t i = 1; i < n; ++i) b[i] = (b[i] - lower_[i] * b[i - 1]) * inv_pivot_[i];
    for (std::size_t i = n - 1; i-- > 0;) b[i] -= upper_[i] * b[i + 1];
  }

  std::size_t size() const { return inv_pivot_.size(); }

 private:
  std::vector<T> lower_, upper_, inv_pivot_;
};

/// LU with partial pivoting (the scheme of LAPACK ?gttrf); safe for
/// indefinite and nearly singular systems.
template <class T>
class PivotedTridiagonalLU {
 public:
  explicit PivotedTridiagonalLU(const Tridiagonal<T>& a) {
    const std::size_t n = a.size();
    dl_ = a.lower;  // dl_[i] multiplies row i+1 after the shift below
    d_ = a.diag;
    du_ = a.upper;
    du2_.assign(n, T{});
    swapped_.assign(n, false);
    // shift sub-diagonal so dl_[i] is the entry (i+1, i)
    for (std::size_t i = 0; i + 1 < n; ++i) dl_[i] = a.lower[i + 1];
    if (n > 0) dl_[n - 1] = T{};
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d_[i]) >= std::abs(dl_[i])) {
        if (std::abs(d_[i]) == 0.0) throw std::runtime_error("singular tridiagonal system");
        const T f = dl_[i] / d_[i];
        dl_[i] = f;
        d_[i + 1] -= f * du_[i];
      } else {
        const T f = d_[i] / dl_[i];
        d_[i] = dl_[i];
        dl_[i] = f;
        const T tmp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = tmp - f * d_[i + 1];
        if (i + 2 < n) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -f * du_[i + 1];
        }
        swapped_[i] = true;
      }
    }
    if (n > 0 && std::abs(d_[n - 1]) == 0.0) throw std::runtime_error("singular tridiagonal system");
  }

  void solve_in_place(std::span<T> b) const {
    const std::size_t n = d_.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (swapped_[i]) {
        const T tmp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = tmp - dl_[i] * b[i];
      } else {
        b[i + 1] -= dl_[i] * b[i];
      }
    }
    b[n - 1] /= d_[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
    for (std::size_t i = n - 2; i-- > 0;) {
      b[i] = (b[i] - du_[i] * b[i + 1] - du2_[i] * b[i + 2]) / d_[i];
    }
  }

 private:
  std::vector<T> dl_, d_, du_, du2_;
  std::vector<bool> swapped_;
};

}  // namespace rtd
