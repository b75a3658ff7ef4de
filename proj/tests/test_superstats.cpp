// Gaussian and q-Gaussian densities and fits, the Gamma precision
// mixture and its closed form, local volatility, the kurtosis time-scale
// scan, and the volatility comparison. Frozen constants come from an
// independent arbitrary-precision computation.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>
#include <vector>

#include "epf/error.hpp"
#include "epf/forecast.hpp"
#include "epf/qgaussian.hpp"
#include "epf/rng.hpp"
#include "epf/synthetic.hpp"
#include "epf/volatility.hpp"

namespace {

// Simpson integration of f over [lo, hi] with n (even) panels.
template <typename F>
double simpson(F&& f, double lo, double hi, int n) {
  double h = (hi - lo) / n;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("gaussian pdf and moment fit behave as expected") {
  REQUIRE(epf::gaussian_pdf(0.0, 0.0, 1.0) == Catch::Approx(0.3989422804014327).margin(1e-15));
  REQUIRE(epf::gaussian_pdf(1.0, 1.0, 2.0) == Catch::Approx(0.3989422804014327 / 2.0).margin(1e-15));
  REQUIRE_THROWS_AS(epf::gaussian_pdf(0.0, 0.0, 0.0), epf::Error);

  auto f = epf::fit_gaussian({-1.0, 1.0});
  REQUIRE(f.mu == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(f.sigma == Catch::Approx(1.0).margin(1e-15));  // population sd
  REQUIRE(f.loglik == Catch::Approx(-2.8378770664093453).margin(1e-12));

  epf::Rng rng(31);
  std::vector<double> sample(100000);
  for (double& v : sample) v = rng.normal(3.0, 2.0);
  auto g = epf::fit_gaussian(sample);
  REQUIRE(g.mu == Catch::Approx(3.0).margin(0.03));
  REQUIRE(g.sigma == Catch::Approx(2.0).margin(0.03));

  REQUIRE_THROWS_AS(epf::fit_gaussian({1.0}), epf::Error);
  REQUIRE_THROWS_AS(epf::fit_gaussian({2.0, 2.0, 2.0}), epf::Error);
}

TEST_CASE("q-Gaussian normalization matches the reference table") {
  auto close = [](double got, double want) {
    REQUIRE(got == Catch::Approx(want).epsilon(1e-12));
  };
  close(epf::qgaussian_norm(1.0), std::sqrt(M_PI));
  close(epf::qgaussian_norm(1.3), 2.0087666606956411);
  close(epf::qgaussian_norm(1.5), 2.2214414690791831);  // pi / sqrt(2)
  close(epf::qgaussian_norm(1.7), 2.5023589869056712);
  close(epf::qgaussian_norm(2.0), M_PI);
  close(epf::qgaussian_norm(2.4), 5.0101948225442893);
  REQUIRE_THROWS_AS(epf::qgaussian_norm(0.9), epf::Error);
  REQUIRE_THROWS_AS(epf::qgaussian_norm(3.0), epf::Error);
}

TEST_CASE("q near 1 degenerates to the Gaussian") {
  // sup over a wide grid; tolerance scales with sqrt(beta) because the
  // density itself does
  for (double beta : {0.25, 1.0, 4.0}) {
    double worst = 0.0;
    for (double p = -6.0; p <= 6.0; p += 0.01) {
      double qg = epf::qgaussian_pdf(p, 1.0 + 1e-8, beta, 0.0);
      double gauss = std::sqrt(beta / M_PI) * std::exp(-beta * p * p);
      worst = std::max(worst, std::abs(qg - gauss));
    }
    REQUIRE(worst <= 5e-9 * std::sqrt(beta));
  }
  // the q == 1 branch is exactly Gaussian
  REQUIRE(epf::qgaussian_pdf(0.7, 1.0, 2.0, 0.2) ==
          Catch::Approx(std::sqrt(2.0 / M_PI) * std::exp(-2.0 * 0.25)).margin(1e-15));
}

TEST_CASE("q-Gaussian mode height and normalization") {
  // at the mode the density is sqrt(beta)/N_q
  REQUIRE(epf::qgaussian_pdf(0.0, 2.0, 9.0, 0.0) == Catch::Approx(3.0 / M_PI).margin(1e-12));

  // unit mass for a spread of q values (tail ranges chosen per exponent)
  struct Case {
    double q, range;
    int panels;
  };
  for (Case c : {Case{1.0, 12.0, 4000}, Case{1.3, 200.0, 200000}, Case{1.7, 5000.0, 400000}}) {
    double total = simpson(
        [&](double p) { return epf::qgaussian_pdf(p, c.q, 1.0, 0.0); }, -c.range, c.range,
        c.panels);
    REQUIRE(total == Catch::Approx(1.0).margin(2e-5));
  }
}

TEST_CASE("gamma mixture parameters map to q-Gaussian and back") {
  auto qp = epf::qgaussian_from_gamma(3.0, 0.5);
  REQUIRE(qp.q == Catch::Approx(1.0 + 2.0 / 7.0).margin(1e-15));
  REQUIRE(qp.beta == Catch::Approx(1.75).margin(1e-15));

  double k = 0.0, theta = 0.0;
  epf::gamma_from_qgaussian(qp.q, qp.beta, k, theta);
  REQUIRE(k == Catch::Approx(3.0).margin(1e-12));
  REQUIRE(theta == Catch::Approx(0.5).margin(1e-12));

  REQUIRE_THROWS_AS(epf::qgaussian_from_gamma(0.0, 1.0), epf::Error);
  REQUIRE_THROWS_AS(epf::gamma_from_qgaussian(1.0, 1.0, k, theta), epf::Error);
}

TEST_CASE("precision mixture density equals its closed form") {
  // frozen reference values at the mode
  REQUIRE(epf::superstat_density_at(1.5, 1.0, 0.0, 0.0) ==
          Catch::Approx(0.6366197723675813).epsilon(1e-9));  // 2/pi
  REQUIRE(epf::superstat_density_at(3.0, 0.5, 0.0, 0.0) ==
          Catch::Approx(0.6629126073623883).epsilon(1e-9));

  for (auto [k, theta] : {std::pair{1.5, 1.0}, std::pair{3.0, 0.5}}) {
    auto qp = epf::qgaussian_from_gamma(k, theta);
    double width = 1.0 / std::sqrt(qp.beta);
    double worst = 0.0;
    for (double z = -10.0; z <= 10.0; z += 0.05) {
      double p = 0.3 + z * width;
      double mix = epf::superstat_density_at(k, theta, p, 0.3);
      double closed = epf::qgaussian_pdf(p, qp.q, qp.beta, 0.3);
      worst = std::max(worst, std::abs(mix - closed));
    }
    REQUIRE(worst <= 1e-8);
  }

  // a very concentrated precision distribution is simply a Gaussian
  double k = 1e5, theta = 2.0 / k;  // mean precision 2, tiny spread
  for (double p : {0.0, 0.3, 1.0}) {
    double want = std::sqrt(2.0 / M_PI) * std::exp(-2.0 * p * p);
    REQUIRE(epf::superstat_density_at(k, theta, p, 0.0) ==
            Catch::Approx(want).epsilon(2e-3));
  }

  // the mixture is a probability density (peak resolved finely, tails
  // coarser; mass beyond 300 is below 1e-7)
  auto f = [&](double p) { return epf::superstat_density_at(1.5, 1.0, p, 0.0); };
  double mass = simpson(f, -30.0, 30.0, 3000) + simpson(f, 30.0, 300.0, 1000) +
                simpson(f, -300.0, -30.0, 1000);
  REQUIRE(mass == Catch::Approx(1.0).margin(1e-4));

  // grid helper is just the pointwise map
  std::vector<double> grid = {-1.0, 0.0, 2.0};
  auto dens = epf::superstat_density(1.5, 1.0, grid, 0.0);
  REQUIRE(dens.size() == 3);
  REQUIRE(dens[1] == Catch::Approx(2.0 / M_PI).epsilon(1e-9));
}

TEST_CASE("q-Gaussian fit recovers mixture-generated samples") {
  // Gamma(1.5, 0.5) precisions correspond to q = 1.5, beta_q = 1
  epf::Rng rng(32);
  std::vector<double> sample(30000);
  for (double& v : sample) {
    double prec = rng.gamma(1.5, 0.5);
    v = 0.25 + rng.normal() / std::sqrt(2.0 * prec);
  }
  auto fit = epf::fit_qgaussian(sample);
  REQUIRE(fit.q == Catch::Approx(1.5).margin(0.06));
  REQUIRE(fit.beta == Catch::Approx(1.0).epsilon(0.2));
  REQUIRE(fit.mu == Catch::Approx(0.25).margin(0.05));

  // on leptokurtic data the q fit beats the Gaussian decisively
  auto g = epf::fit_gaussian(sample);
  REQUIRE(fit.loglik > g.loglik + 10.0);
}

TEST_CASE("q-Gaussian fit stays near 1 on Gaussian data") {
  epf::Rng rng(33);
  std::vector<double> sample(20000);
  for (double& v : sample) v = rng.normal(1.0, 0.5);
  auto fit = epf::fit_qgaussian(sample);
  REQUIRE(fit.q < 1.1);
  REQUIRE(fit.mu == Catch::Approx(1.0).margin(0.02));
  auto g = epf::fit_gaussian(sample);
  REQUIRE(fit.loglik >= g.loglik);  // never worse than the boundary

  REQUIRE_THROWS_AS(epf::fit_qgaussian(std::vector<double>(50, 1.0)), epf::Error);
}

TEST_CASE("gamma fit recovers shape and scale") {
  epf::Rng rng(34);
  std::vector<double> sample(100000);
  for (double& v : sample) v = rng.gamma(2.0, 3.0);
  auto fit = epf::fit_gamma(sample);
  REQUIRE(fit.shape == Catch::Approx(2.0).margin(0.1));
  REQUIRE(fit.scale == Catch::Approx(3.0).margin(0.15));

  for (double& v : sample) v = rng.gamma(1.0, 1.0);  // exponential
  auto e = epf::fit_gamma(sample);
  REQUIRE(e.shape == Catch::Approx(1.0).margin(0.05));

  REQUIRE_THROWS_AS(epf::fit_gamma({1.0, 2.0, 3.0}), epf::Error);
  REQUIRE_THROWS_AS(epf::fit_gamma(std::vector<double>(20, 5.0)), epf::Error);
  std::vector<double> bad(20, 1.0);
  bad[3] = -0.5;
  REQUIRE_THROWS_AS(epf::fit_gamma(bad), epf::Error);
}

TEST_CASE("local volatility inverts the window variance") {
  // alternating +-sqrt(3.5) has sample variance exactly 4
  const double a = std::sqrt(3.5);
  std::vector<double> x;
  for (int i = 0; i < 8; ++i) x.push_back(i % 2 == 0 ? a : -a);
  auto w = epf::local_volatility(x, 8);
  REQUIRE(w.value.size() == 1);
  REQUIRE(w.start[0] == 0);
  REQUIRE(w.value[0] == 0.125);  // 1 / (2 * 4), exact
  REQUIRE(w.skipped == 0);

  // constant windows are skipped and counted
  std::vector<double> y(24, 7.0);
  for (int i = 0; i < 8; ++i) y[8 + i] = (i % 2 == 0 ? a : -a);
  auto w2 = epf::local_volatility(y, 8);
  REQUIRE(w2.value.size() == 1);
  REQUIRE(w2.start[0] == 8);
  REQUIRE(w2.skipped == 2);

  // beta scales as 1/c^2
  std::vector<double> x3 = x;
  for (double& v : x3) v *= 5.0;
  auto w3 = epf::local_volatility(x3, 8);
  REQUIRE(w3.value[0] == Catch::Approx(0.125 / 25.0).epsilon(1e-12));

  REQUIRE_THROWS_AS(epf::local_volatility(x, 4), epf::Error);
  REQUIRE_THROWS_AS(epf::local_volatility(std::vector<double>(5, 1.0), 8), epf::Error);

  // unit-variance noise concentrates beta near 1/2
  epf::Rng rng(35);
  std::vector<double> z(96 * 300);
  for (double& v : z) v = rng.normal();
  auto wz = epf::local_volatility(z, 96);
  REQUIRE(wz.value.size() == 300);
  double med = 0.0;
  {
    auto copy = wz.value;
    std::nth_element(copy.begin(), copy.begin() + 150, copy.end());
    med = copy[150];
  }
  REQUIRE(med > 0.4);
  REQUIRE(med < 0.6);
}

TEST_CASE("model volatility is the inverse predictive variance") {
  epf::ForecastDistribution fc;
  fc.times = {0, 1, 2};
  fc.mu = {10.0, 20.0, 30.0};
  fc.sigma = {2.0, 1.0, 0.5};
  auto nu = epf::lstm_volatility(fc);
  REQUIRE(nu == (std::vector<double>{0.25, 1.0, 4.0}));

  fc.sigma[1] = 0.0;
  REQUIRE_THROWS_AS(epf::lstm_volatility(fc), epf::Error);
}

TEST_CASE("windowed kurtosis flags heavy tails") {
  // alternating +-1 has fourth moment equal to the squared variance
  std::vector<double> flat;
  for (int i = 0; i < 8; ++i) flat.push_back(i % 2 == 0 ? 1.0 : -1.0);
  auto k1 = epf::local_kurtosis(flat, 8);
  REQUIRE(k1.value.size() == 1);
  REQUIRE(k1.value[0] == Catch::Approx(1.0).margin(1e-12));

  epf::Rng rng(36);
  std::vector<double> z(256 * 200);
  for (double& v : z) v = rng.normal();
  auto k2 = epf::local_kurtosis(z, 256);
  double mean = 0.0;
  for (double v : k2.value) mean += v;
  mean /= static_cast<double>(k2.value.size());
  REQUIRE(mean == Catch::Approx(3.0).margin(0.2));

  std::vector<double> spike;
  for (int i = 0; i < 8; ++i) spike.push_back(i % 2 == 0 ? 0.1 : -0.1);
  spike[3] = 50.0;
  auto k3 = epf::local_kurtosis(spike, 8);
  REQUIRE(k3.value[0] > 4.0);
}

TEST_CASE("time-scale scan stops at the first heavy window size") {
  // uniform noise is platykurtic at every scale: never reaches 3
  epf::Rng rng(37);
  std::vector<double> u(20000);
  for (double& v : u) v = rng.uniform(-1.0, 1.0);
  auto flat = epf::estimate_timescale(u);
  REQUIRE_FALSE(flat.reached);
  REQUIRE(flat.tau_hat == 512);  // ran off the end of the grid
  REQUIRE(flat.grid.size() == 13);
  for (double m : flat.mean_kurtosis) REQUIRE(m < 3.0);

  // a precision mixture with 96-hour blocks turns heavy near the block
  // length; 64-hour windows already straddle boundaries often enough
  auto ss = epf::gen_superstat_series(1.5, 1.0, 96, 300, 38);
  auto est = epf::estimate_timescale(ss.series);
  REQUIRE(est.reached);
  REQUIRE(est.tau_hat >= 32);
  REQUIRE(est.tau_hat <= 192);
  REQUIRE(est.tau_hat == 64);  // deterministic for this seed

  REQUIRE_THROWS_AS(epf::estimate_timescale(std::vector<double>(100, 1.0)), epf::Error);
  REQUIRE_THROWS_AS(epf::estimate_timescale(std::vector<double>(20000, 1.0)), epf::Error);
}

TEST_CASE("spearman handles ties and degenerate input") {
  std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> b = {10.0, 20.0, 30.0, 40.0};
  REQUIRE(epf::spearman(a, b).value() == Catch::Approx(1.0).margin(1e-12));
  std::vector<double> r = {40.0, 30.0, 20.0, 10.0};
  REQUIRE(epf::spearman(a, r).value() == Catch::Approx(-1.0).margin(1e-12));

  // tied pair gets the average rank
  std::vector<double> t1 = {1.0, 1.0, 2.0};
  std::vector<double> t2 = {3.0, 5.0, 9.0};
  REQUIRE(epf::spearman(t1, t2).value() ==
          Catch::Approx(std::sqrt(3.0) / 2.0).margin(1e-12));

  REQUIRE_FALSE(epf::spearman({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}).has_value());
  REQUIRE_THROWS_AS(epf::spearman({1.0}, {1.0}), epf::Error);
  REQUIRE_THROWS_AS(epf::spearman({1.0, 2.0}, {1.0, 2.0, 3.0}), epf::Error);
}

TEST_CASE("volatility comparison aligns windows with forecast hours") {
  // three 8-hour windows with per-window scales 1, 2, 4
  const double a = std::sqrt(3.5);
  epf::VolatilitySeries vol;
  vol.tau_hours = 8;
  std::vector<double> scales = {1.0, 2.0, 4.0};
  epf::ForecastDistribution fc;
  std::vector<double> x;
  for (int w = 0; w < 3; ++w) {
    for (int i = 0; i < 8; ++i) {
      x.push_back((i % 2 == 0 ? a : -a) * scales[static_cast<std::size_t>(w)]);
      fc.times.push_back(static_cast<epf::HourStamp>(w * 8 + i));
      fc.mu.push_back(0.0);
      fc.sigma.push_back(scales[static_cast<std::size_t>(w)]);
    }
  }
  auto ws = epf::local_volatility(x, 8);
  for (std::size_t i = 0; i < ws.value.size(); ++i) {
    vol.beta_start.push_back(static_cast<epf::HourStamp>(ws.start[i]));
    vol.beta.push_back(ws.value[i]);
  }

  auto cmp = epf::compare_volatilities(vol, fc, 10);
  REQUIRE(cmp.beta.size() == 3);
  REQUIRE(cmp.beta[0] == 0.125);
  REQUIRE(cmp.beta[1] == Catch::Approx(0.125 / 4.0).epsilon(1e-12));
  REQUIRE(cmp.nu_mean[0] == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(cmp.nu_mean[1] == Catch::Approx(0.25).margin(1e-12));
  REQUIRE(cmp.nu_mean[2] == Catch::Approx(0.0625).margin(1e-12));
  REQUIRE(cmp.median_beta == Catch::Approx(0.125 / 4.0).epsilon(1e-12));
  REQUIRE(cmp.median_nu == Catch::Approx(0.25).margin(1e-12));
  REQUIRE(cmp.spearman_rank.has_value());
  REQUIRE(cmp.spearman_rank.value() == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(cmp.bin_edges.size() == 11);
  REQUIRE(cmp.beta_density.size() == 10);

  // identical windows leave the rank correlation undefined
  epf::VolatilitySeries flat;
  flat.tau_hours = 8;
  flat.beta_start = {0, 8, 16};
  flat.beta = {0.125, 0.125, 0.125};
  epf::ForecastDistribution fc2 = fc;
  for (double& s : fc2.sigma) s = 2.0;
  auto cmp2 = epf::compare_volatilities(flat, fc2, 10);
  REQUIRE_FALSE(cmp2.spearman_rank.has_value());

  // disjoint coverage is an error
  epf::VolatilitySeries off;
  off.tau_hours = 8;
  off.beta_start = {100000};
  off.beta = {0.5};
  REQUIRE_THROWS_AS(epf::compare_volatilities(off, fc, 10), epf::Error);

  epf::VolatilitySeries empty;
  REQUIRE_THROWS_AS(epf::compare_volatilities(empty, fc, 10), epf::Error);
}
