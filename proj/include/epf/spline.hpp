// Natural cubic spline interpolation (zero second derivative at both
// ends), solved with the Thomas algorithm. Degenerates gracefully to
// linear/constant for tiny knot sets.
#pragma once

#include <cstddef>
#include <vector>

#include "epf/error.hpp"

namespace epf {

class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n == 0 || n != y_.size()) fail(ErrorClass::data, "spline: empty or mismatched knots");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1])) fail(ErrorClass::data, "spline: knots must strictly increase");
    m_.assign(n, 0.0);
    if (n < 3) return;  // natural spline through <=2 points is linear
    // tridiagonal system for interior second derivatives
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
    diag[0] = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double h0 = x_[i] - x_[i - 1];
      double h1 = x_[i + 1] - x_[i];
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    diag[n - 1] = 1.0;
    // forward elimination (lower entry of row i is h0 = x_i - x_{i-1})
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double h0 = x_[i] - x_[i - 1];
      double lower = i == 1 ? 0.0 : h0;  // row 1's lower multiplies m_0 = 0
      if (i > 1) {
        double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
    }
    for (std::size_t k = n - 1; k-- > 1;)  // back substitution, m_{n-1} = 0
      m_[k] = (rhs[k] - upper[k] * m_[k + 1]) / diag[k];
  }

  double operator()(double t) const {
    const std::size_t n = x_.size();
    if (n == 1) return y_[0];
    // locate interval; clamp to the end cubics for extrapolation
    std::size_t lo = 0, hi = n - 1;
    if (t <= x_[0])
      hi = 1;
    else if (t >= x_[n - 1])
      lo = n - 2;
    else {
      while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (x_[mid] <= t)
          lo = mid;
        else
          hi = mid;
      }
    }
    double h = x_[hi] - x_[lo];
    double a = (x_[hi] - t) / h;
    double b = (t - x_[lo]) / h;
    return a * y_[lo] + b * y_[hi] +
           ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * h * h / 6.0;
  }

 private:
  std::vector<double> x_, y_, m_;
};

}  // namespace epf
