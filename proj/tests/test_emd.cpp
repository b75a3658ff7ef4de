// Empirical mode decomposition, the spline underneath it, and detrending.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <vector>

#include "epf/csv.hpp"
#include "epf/emd.hpp"
#include "epf/error.hpp"
#include "epf/rng.hpp"
#include "epf/spline.hpp"

namespace {

double corr(const std::vector<double>& a, const std::vector<double>& b, std::size_t lo,
            std::size_t hi) {
  double ma = 0, mb = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    ma += a[i];
    mb += b[i];
  }
  const double n = static_cast<double>(hi - lo);
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> tone(std::size_t n, double period, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t)
    x[t] = amp * std::sin(2.0 * M_PI * static_cast<double>(t) / period + phase);
  return x;
}

}  // namespace

TEST_CASE("natural cubic spline interpolates knots and reproduces lines") {
  std::vector<double> x = {0.0, 2.0, 5.0, 7.0, 11.0};
  std::vector<double> y;
  for (double v : x) y.push_back(2.0 * v + 1.0);
  epf::CubicSpline s(x, y);
  for (std::size_t i = 0; i < x.size(); ++i)
    REQUIRE(s(x[i]) == Catch::Approx(y[i]).margin(1e-12));
  // a straight line has zero curvature everywhere, so the natural
  // boundary conditions make the interpolant exact between knots too
  for (double t = 0.0; t <= 11.0; t += 0.37)
    REQUIRE(s(t) == Catch::Approx(2.0 * t + 1.0).margin(1e-10));

  // nonuniform data still passes through every knot
  std::vector<double> y2 = {1.0, -3.0, 2.5, 2.5, 0.0};
  epf::CubicSpline s2(x, y2);
  for (std::size_t i = 0; i < x.size(); ++i)
    REQUIRE(s2(x[i]) == Catch::Approx(y2[i]).margin(1e-12));
}

TEST_CASE("plateau extrema are reported at their midpoint") {
  std::vector<std::size_t> maxima, minima;
  epf::detail::find_extrema({0, 1, 1, 1, 0}, maxima, minima);
  REQUIRE(maxima == std::vector<std::size_t>{2});
  REQUIRE(minima.empty());

  epf::detail::find_extrema({0, 2, 0, -1, 0}, maxima, minima);
  REQUIRE(maxima == std::vector<std::size_t>{1});
  REQUIRE(minima == std::vector<std::size_t>{3});

  // endpoints never count as extrema
  epf::detail::find_extrema({5, 1, 2, 1, 5}, maxima, minima);
  REQUIRE(maxima == std::vector<std::size_t>{2});
  REQUIRE(minima == (std::vector<std::size_t>{1, 3}));
}

TEST_CASE("a monotone series yields no modes") {
  std::vector<double> x(100);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = 5.0 + 0.1 * static_cast<double>(t);
  auto d = epf::decompose(x);
  REQUIRE(d.imfs.empty());
  REQUIRE(d.residual == x);
}

TEST_CASE("a single tone is extracted as the first mode") {
  auto x = tone(1000, 50.0);
  auto d = epf::decompose(x);
  REQUIRE(d.imfs.size() >= 1);
  REQUIRE(corr(d.imfs[0], x, 0, x.size()) > 0.99);
  // away from the boundaries almost nothing is left behind
  double worst = 0.0;
  std::vector<double> rest(x.size(), 0.0);
  for (std::size_t k = 1; k < d.imfs.size(); ++k)
    for (std::size_t t = 0; t < x.size(); ++t) rest[t] += d.imfs[k][t];
  for (std::size_t t = 100; t < 900; ++t)
    worst = std::max(worst, std::abs(rest[t] + d.residual[t]));
  REQUIRE(worst < 0.1);
}

TEST_CASE("two well-separated tones split into fast and slow parts") {
  const std::size_t n = 1200;
  auto fast = tone(n, 20.0);
  auto slow = tone(n, 200.0);
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = fast[t] + slow[t];

  auto d = epf::decompose(x);
  REQUIRE(d.imfs.size() >= 2);
  REQUIRE(corr(d.imfs[0], fast, 100, n - 100) > 0.95);
  std::vector<double> remainder(n);
  for (std::size_t t = 0; t < n; ++t) remainder[t] = x[t] - d.imfs[0][t];
  REQUIRE(corr(remainder, slow, 100, n - 100) > 0.95);
}

TEST_CASE("modes plus residual reconstruct the input") {
  epf::Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 400;
    std::vector<double> x(n, 0.0);
    int tones = 3 + static_cast<int>(rng.uniform(0.0, 5.0));
    for (int k = 0; k < tones; ++k) {
      double period = rng.uniform(8.0, 300.0);
      double amp = rng.uniform(0.2, 2.0);
      double phase = rng.uniform(0.0, 2.0 * M_PI);
      for (std::size_t t = 0; t < n; ++t)
        x[t] += amp * std::sin(2.0 * M_PI * static_cast<double>(t) / period + phase);
    }
    double slope = rng.uniform(-0.01, 0.01);
    for (std::size_t t = 0; t < n; ++t) x[t] += slope * static_cast<double>(t);

    auto d = epf::decompose(x);
    double amp = 0.0;
    for (double v : x) amp = std::max(amp, std::abs(v));
    double worst = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      double sum = d.residual[t];
      for (const auto& imf : d.imfs) sum += imf[t];
      worst = std::max(worst, std::abs(sum - x[t]));
    }
    REQUIRE(worst <= 1e-8 * std::max(1.0, amp));
  }
}

TEST_CASE("adding a constant shifts only the residual") {
  auto x = tone(600, 40.0);
  std::vector<double> y = x;
  for (double& v : y) v += 123.456;
  auto dx = epf::decompose(x);
  auto dy = epf::decompose(y);
  // the stopping rule may sift the shifted signal further, producing
  // extra numerically-zero modes; the original modes must be unchanged
  REQUIRE(dy.imfs.size() >= dx.imfs.size());
  for (std::size_t k = 0; k < dx.imfs.size(); ++k)
    for (std::size_t t = 0; t < x.size(); ++t)
      REQUIRE(dy.imfs[k][t] == Catch::Approx(dx.imfs[k][t]).margin(1e-10));
  for (std::size_t k = dx.imfs.size(); k < dy.imfs.size(); ++k)
    for (double v : dy.imfs[k]) REQUIRE(std::abs(v) < 1e-10);
  for (std::size_t t = 0; t < x.size(); ++t)
    REQUIRE(dy.residual[t] - dx.residual[t] == Catch::Approx(123.456).margin(1e-10));
}

TEST_CASE("decompose rejects short or non-finite input") {
  REQUIRE_THROWS_AS(epf::decompose(std::vector<double>(5, 1.0)), epf::Error);
  std::vector<double> bad(100, 1.0);
  bad[7] = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(epf::decompose(bad), epf::Error);
}

TEST_CASE("detrending a monotone series gives zero") {
  std::vector<double> x(200);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = 3.0 - 0.02 * static_cast<double>(t);
  auto out = epf::detrend(x, 5);
  for (double v : out) REQUIRE(std::abs(v) <= 1e-12);
}

TEST_CASE("detrend with zero slow modes removes exactly the residual") {
  auto x = tone(500, 30.0);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] += 0.005 * static_cast<double>(t);
  auto d = epf::decompose(x);
  auto out = epf::detrend(x, 0, /*include_residual=*/true);
  for (std::size_t t = 0; t < x.size(); ++t)
    REQUIRE(out[t] == Catch::Approx(x[t] - d.residual[t]).margin(1e-12));

  // without the residual, zero slow modes means a no-op
  auto noop = epf::detrend(x, 0, /*include_residual=*/false);
  REQUIRE(noop == x);
}

TEST_CASE("detrending strips a ramp but keeps the oscillation") {
  const std::size_t n = 1000;
  auto fast = tone(n, 24.0);
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = fast[t] + 0.01 * static_cast<double>(t) + 10.0;

  // counting the residual as one of the slow modes keeps the tone
  auto out = epf::detrend(x, 1, /*include_residual=*/false);
  double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(n);
  REQUIRE(std::abs(mean) < 1e-2);
  REQUIRE(corr(out, fast, 50, n - 50) > 0.99);

  // asking for more slow modes than exist removes the whole signal
  auto all = epf::detrend(x, 5);
  for (double v : all) REQUIRE(std::abs(v) <= 1e-8);
}

TEST_CASE("detrending commutes with positive scaling") {
  auto x = tone(400, 18.0);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] += 0.02 * static_cast<double>(t);
  std::vector<double> x3 = x;
  for (double& v : x3) v *= 3.0;
  auto a = epf::detrend(x, 3);
  auto b = epf::detrend(x3, 3);
  for (std::size_t t = 0; t < x.size(); ++t)
    REQUIRE(b[t] == Catch::Approx(3.0 * a[t]).margin(1e-9));
}

TEST_CASE("mode table round-trips through its CSV form") {
  auto x = tone(300, 25.0);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] += 0.01 * static_cast<double>(t);
  auto d = epf::decompose(x);
  auto path = (std::filesystem::temp_directory_path() / "epf_imfs.csv").string();
  epf::write_imfs_csv(path, d);

  auto table = epf::read_csv(path);
  REQUIRE(table.header.size() == d.imfs.size() + 2);  // t, modes..., residual
  REQUIRE(table.rows.size() == x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    double sum = 0.0;
    for (std::size_t c = 1; c < table.header.size(); ++c)
      sum += epf::parse_cell_or_fail(table.rows[t][c], "imf cell");
    REQUIRE(sum == Catch::Approx(x[t]).margin(1e-9));
  }
  std::filesystem::remove(path);
}
