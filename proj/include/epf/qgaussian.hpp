// Gaussian and q-Gaussian densities and fits, the Gamma fit for
// volatility samples, and the superstatistical Gamma mixture density
// evaluated by adaptive quadrature.
//
// Conventions: the q-Gaussian is (sqrt(beta)/N_q) e_q(-beta (p-mu)^2)
// with e_q(x) = [1+(1-q)x]^{1/(1-q)} and N_q from the Student-t
// correspondence. A Gamma(k, theta) mixture of Gaussian precisions is
// exactly a q-Gaussian with q = 1 + 2/(2k+1), beta_q = theta (k+1/2).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "epf/error.hpp"

namespace epf {

inline double gaussian_pdf(double x, double mu, double sigma) {
  if (!(sigma > 0.0)) fail(ErrorClass::numeric, "gaussian_pdf: sigma must be positive");
  double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
}

struct GaussianFit {
  double mu = 0.0;
  double sigma = 0.0;  // maximum-likelihood (population) standard deviation
  double loglik = 0.0;
};

inline GaussianFit fit_gaussian(const std::vector<double>& sample) {
  if (sample.size() < 2) fail(ErrorClass::data, "fit_gaussian: need at least 2 points");
  GaussianFit f;
  for (double v : sample) f.mu += v;
  f.mu /= static_cast<double>(sample.size());
  double ss = 0.0;
  for (double v : sample) ss += (v - f.mu) * (v - f.mu);
  f.sigma = std::sqrt(ss / static_cast<double>(sample.size()));
  if (!(f.sigma > 0.0)) fail(ErrorClass::data, "fit_gaussian: degenerate sample");
  for (double v : sample) f.loglik += std::log(gaussian_pdf(v, f.mu, f.sigma));
  return f;
}

namespace detail {

// Gamma(b + 1/2) / Gamma(b) for b > 0, switching to the asymptotic
// series for large b where lgamma differences lose precision.
inline double gamma_ratio_half(double b) {
  if (b < 20.0) return std::exp(std::lgamma(b + 0.5) - std::lgamma(b));
  double inv = 1.0 / b;
  double s = 1.0 + inv * (-1.0 / 8.0 + inv * (1.0 / 128.0 + inv * (5.0 / 1024.0 + inv * (-21.0 / 32768.0))));
  return std::sqrt(b) * s;
}

inline double digamma(double x) {
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  double inv = 1.0 / x, inv2 = inv * inv;
  return acc + std::log(x) - 0.5 * inv -
         inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
}

inline double trigamma(double x) {
  double acc = 0.0;
  while (x < 6.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  double inv = 1.0 / x, inv2 = inv * inv;
  return acc + inv * (1.0 + inv * (0.5 + inv * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 / 42.0))));
}

}  // namespace detail

// Normalization constant N_q such that the q-Gaussian density is
// sqrt(beta)/N_q at its mode. N_1 = sqrt(pi), N_2 = pi.
inline double qgaussian_norm(double q) {
  if (q < 1.0 || q >= 3.0) fail(ErrorClass::numeric, "qgaussian: q must lie in [1, 3)");
  if (q == 1.0) return std::sqrt(M_PI);
  double a = 1.0 / (q - 1.0);        // N_q = sqrt(pi) Gamma(a - 1/2) / (sqrt(q-1) Gamma(a))
  double b = a - 0.5;                // Gamma(a - 1/2)/Gamma(a) = 1 / gamma_ratio_half(b)
  return std::sqrt(M_PI) * std::sqrt(a) / detail::gamma_ratio_half(b);
}

inline double qgaussian_pdf(double p, double q, double beta, double mu) {
  if (!(beta > 0.0)) fail(ErrorClass::numeric, "qgaussian: beta must be positive");
  double r = p - mu;
  if (q == 1.0) return std::sqrt(beta / M_PI) * std::exp(-beta * r * r);
  if (q < 1.0 || q >= 3.0) fail(ErrorClass::numeric, "qgaussian: q must lie in [1, 3)");
  double bracket = 1.0 + (q - 1.0) * beta * r * r;
  if (bracket <= 0.0) return 0.0;
  double a = 1.0 / (q - 1.0);
  return std::sqrt(beta) / qgaussian_norm(q) * std::exp(-a * std::log1p((q - 1.0) * beta * r * r));
}

// Gamma(k, theta) precision mixture <-> q-Gaussian parameter map.
struct QGaussianParams {
  double q;
  double beta;
};

inline QGaussianParams qgaussian_from_gamma(double k, double theta) {
  if (!(k > 0.0) || !(theta > 0.0))
    fail(ErrorClass::numeric, "gamma mixture: shape and scale must be positive");
  return {1.0 + 2.0 / (2.0 * k + 1.0), theta * (k + 0.5)};
}

inline void gamma_from_qgaussian(double q, double beta, double& k, double& theta) {
  if (q <= 1.0 || q >= 3.0) fail(ErrorClass::numeric, "gamma mixture: need 1 < q < 3");
  k = 1.0 / (q - 1.0) - 0.5;
  theta = beta * (q - 1.0);
}

namespace detail {

// Adaptive Simpson on [lo, hi] with absolute tolerance tol.
inline double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                               double flo, double fmid, double fhi, double whole, double tol,
                               int depth) {
  double mid = 0.5 * (lo + hi);
  double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
  double flm = f(lmid), frm = f(rmid);
  double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
  double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
  double delta = left + right - whole;
  if (depth <= 0) fail(ErrorClass::numeric, "quadrature did not converge");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, lo, mid, flo, flm, fmid, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double mid = 0.5 * (lo + hi);
  double flo = f(lo), fmid = f(mid), fhi = f(hi);
  double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
  return adaptive_simpson(f, lo, hi, flo, fmid, fhi, whole, tol, 48);
}

}  // namespace detail

// Superstatistical density: rho(p) = Int f(beta) sqrt(beta/pi)
// exp(-beta (p-mu)^2) dbeta with f = Gamma(k, theta), by adaptive
// quadrature after substituting beta = u^2 (the integrand is then
// smooth at 0 for every k > 0). Relative tolerance 1e-8.
inline double superstat_density_at(double k, double theta, double p, double mu) {
  if (!(k > 0.0) || !(theta > 0.0))
    fail(ErrorClass::numeric, "superstat: shape and scale must be positive");
  double r = p - mu;
  double s = 1.0 / theta + r * r;
  // integrand: c * u^{2k} exp(-s u^2), c = 2 / (sqrt(pi) Gamma(k) theta^k)
  double log_c = std::log(2.0) - 0.5 * std::log(M_PI) - std::lgamma(k) - k * std::log(theta);
  auto integrand = [&](double u) {
    if (u <= 0.0) return 0.0;
    return std::exp(log_c + 2.0 * k * std::log(u) - s * u * u);
  };
  double upper = std::sqrt((k + 90.0 + 14.0 * std::sqrt(k + 1.0)) / s);
  // peak * upper overestimates the integral, so this absolute tolerance
  // is at least as tight as a 1e-9 relative one
  double u_peak = std::sqrt(k / s);  // argmax of u^{2k} e^{-s u^2}
  double peak = integrand(u_peak);
  double tol = std::max(peak * upper * 1e-9, std::numeric_limits<double>::min());
  // split at the maximum: for large k the peak is far too narrow for the
  // first few panels of a single-interval refinement to notice
  return detail::integrate(integrand, 0.0, u_peak, 0.5 * tol) +
         detail::integrate(integrand, u_peak, upper, 0.5 * tol);
}

inline std::vector<double> superstat_density(double k, double theta,
                                             const std::vector<double>& grid, double mu) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    out[i] = superstat_density_at(k, theta, grid[i], mu);
  return out;
}

struct QGaussianFit {
  double q = 1.0;
  double beta = 0.0;
  double mu = 0.0;
  double loglik = 0.0;  // total log-likelihood at the fit
  bool converged = true;
};

namespace detail {

// Maximum-likelihood (mu, beta) for fixed q > 1 by alternating an IRLS
// mean update with a safeguarded Newton solve of the beta stationarity
// condition N/(2 beta) = sum r_i^2 / (1 + (q-1) beta r_i^2).
inline QGaussianFit fit_qgaussian_fixed_q(const std::vector<double>& x, double q, double mu0,
                                          double beta0) {
  const double n = static_cast<double>(x.size());
  const double qm1 = q - 1.0;
  double mu = mu0;
  double beta = beta0;
  bool converged = false;

  auto solve_beta = [&](double mu_cur, double beta_start) {
    // root of h(beta) = (2 beta / n) sum r^2/(1+(q-1) beta r^2) - 1,
    // strictly increasing from -1 to 2/(q-1) - 1 > 0
    double lo = beta_start, hi = beta_start;
    auto h = [&](double b) {
      double acc = 0.0;
      for (double v : x) {
        double r2 = (v - mu_cur) * (v - mu_cur);
        acc += r2 / (1.0 + qm1 * b * r2);
      }
      return 2.0 * b * acc / n - 1.0;
    };
    while (h(lo) > 0.0) lo *= 0.5;
    while (h(hi) < 0.0) hi *= 2.0;
    double b = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      double hv = h(b);
      if (hv > 0.0)
        hi = b;
      else
        lo = b;
      // Newton step using h'(b) = (2/n) sum r^2/(1+c r^2)^2 evaluated inline
      double d = 0.0;
      for (double v : x) {
        double r2 = (v - mu_cur) * (v - mu_cur);
        double den = 1.0 + qm1 * b * r2;
        d += r2 / (den * den);
      }
      d *= 2.0 / n;
      double step = d > 0.0 ? hv / d : 0.0;
      double bn = b - step;
      if (!(bn > lo && bn < hi)) bn = 0.5 * (lo + hi);
      if (std::abs(bn - b) <= 1e-12 * b) return bn;
      b = bn;
    }
    return b;
  };

  for (int it = 0; it < 60; ++it) {
    double beta_new = solve_beta(mu, beta);
    double wsum = 0.0, wx = 0.0;
    for (double v : x) {
      double r2 = (v - mu) * (v - mu);
      double w = 1.0 / (1.0 + qm1 * beta_new * r2);
      wsum += w;
      wx += w * v;
    }
    double mu_new = wx / wsum;
    bool done = std::abs(beta_new - beta) <= 1e-10 * std::abs(beta) + 1e-300 &&
                std::abs(mu_new - mu) <= 1e-10 * (std::abs(mu) + 1.0);
    beta = beta_new;
    mu = mu_new;
    if (done) {
      converged = true;
      break;
    }
  }

  QGaussianFit f;
  f.q = q;
  f.beta = beta;
  f.mu = mu;
  f.converged = converged;
  double a = 1.0 / qm1;
  double base = 0.5 * std::log(beta) - std::log(qgaussian_norm(q));
  double acc = 0.0;
  for (double v : x) acc += std::log1p(qm1 * beta * (v - mu) * (v - mu));
  f.loglik = n * base - a * acc;
  return f;
}

}  // namespace detail

// Maximum likelihood over (q, beta, mu): golden-section search on q with
// inner closed-ish fits, compared against the q = 1 Gaussian boundary.
// The returned log-likelihood is never below the Gaussian fit's.
inline QGaussianFit fit_qgaussian(const std::vector<double>& sample) {
  if (sample.size() < 100) fail(ErrorClass::data, "fit_qgaussian: need at least 100 points");
  GaussianFit g = fit_gaussian(sample);
  double beta_init = 1.0 / (2.0 * g.sigma * g.sigma);

  auto profile = [&](double q) {
    return detail::fit_qgaussian_fixed_q(sample, q, g.mu, beta_init);
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 1.0 + 1e-6, hi = 2.999;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  QGaussianFit f1 = profile(x1), f2 = profile(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-7; ++it) {
    if (f1.loglik >= f2.loglik) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = profile(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = profile(x2);
    }
  }
  QGaussianFit best = f1.loglik >= f2.loglik ? f1 : f2;

  QGaussianFit gauss;
  gauss.q = 1.0;
  gauss.beta = beta_init;
  gauss.mu = g.mu;
  gauss.loglik = g.loglik;
  return best.loglik >= gauss.loglik ? best : gauss;
}

struct GammaFit {
  double shape = 0.0;
  double scale = 0.0;
};

// Method of moments refined by Newton on the profile likelihood
// equation ln k - digamma(k) = ln(mean) - mean(ln x).
inline GammaFit fit_gamma(const std::vector<double>& sample) {
  if (sample.size() < 10) fail(ErrorClass::data, "fit_gamma: need at least 10 points");
  double mean = 0.0, log_mean = 0.0;
  for (double v : sample) {
    if (!(v > 0.0)) fail(ErrorClass::data, "fit_gamma: sample must be positive");
    mean += v;
    log_mean += std::log(v);
  }
  const double n = static_cast<double>(sample.size());
  mean /= n;
  log_mean /= n;
  double var = 0.0;
  for (double v : sample) var += (v - mean) * (v - mean);
  var /= n - 1.0;
  if (!(var > 0.0)) fail(ErrorClass::data, "fit_gamma: zero variance");

  double k = mean * mean / var;
  const double s = std::log(mean) - log_mean;  // > 0 by Jensen
  for (int it = 0; it < 25; ++it) {
    double f = std::log(k) - detail::digamma(k) - s;
    double df = 1.0 / k - detail::trigamma(k);
    double kn = k - f / df;
    if (!(kn > 0.0)) kn = 0.5 * k;
    if (std::abs(kn - k) <= 1e-12 * k) {
      k = kn;
      break;
    }
    k = kn;
  }
  return {k, mean / k};
}

}  // namespace epf
