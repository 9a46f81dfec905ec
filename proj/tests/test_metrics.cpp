#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "chf/errors.hpp"
#include "chf/metrics.hpp"
#include "chf/rng.hpp"

using namespace chf;

TEST_CASE("nrmse hand cases, including the N-1 divisor") {
  std::vector<double> same{3, 4, 5};
  CHECK(nrmse(same, same) == 0.0);

  // sqrt((1+1)/1) / 2
  std::vector<double> m1{1, 3}, p1{2, 2};
  CHECK(nrmse(m1, p1) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));

  // sqrt(1/2) / 2
  std::vector<double> m2{1, 2, 3}, p2{1, 2, 4};
  CHECK(nrmse(m2, p2) ==
        doctest::Approx(std::sqrt(0.5) / 2.0).epsilon(1e-12));
}

TEST_CASE("nrmse rejects degenerate inputs") {
  std::vector<double> a{1, 2}, b{1};
  CHECK_THROWS_AS(nrmse(a, b), ValidationError);
  std::vector<double> zero_mean{-1, 1}, p{0, 0};
  CHECK_THROWS_AS(nrmse(zero_mean, p), ValidationError);
  std::vector<double> one{1};
  CHECK_THROWS_AS(nrmse(one, one), ValidationError);
}

TEST_CASE("mae hand cases and symmetry") {
  std::vector<double> same{1, 2, 3};
  CHECK(mae(same, same) == 0.0);

  std::vector<double> m{1, 2, 3}, p{2, 2, 2};
  CHECK(mae(m, p) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(mae(m, p) == mae(p, m));

  Rng rng(1);
  std::vector<double> a(50), b(50);
  for (std::size_t i = 0; i < 50; ++i) {
    a[i] = rng.uniform(-10, 10);
    b[i] = rng.uniform(-10, 10);
  }
  CHECK(mae(a, b) == mae(b, a));
}

TEST_CASE("nse hand cases") {
  std::vector<double> m{1, 2, 3};
  CHECK(nse(m, m) == 1.0);

  // predicting the mean for every sample -> exactly 0
  std::vector<double> mean_pred(3, (1.0 + 2.0 + 3.0) / 3.0);
  CHECK(nse(m, mean_pred) == 0.0);

  std::vector<double> p{1, 2, 4};
  CHECK(nse(m, p) == doctest::Approx(0.5).epsilon(1e-12));

  std::vector<double> constant{5, 5, 5};
  CHECK_THROWS_AS(nse(constant, p), ValidationError);
}

TEST_CASE("nse goes negative for worse-than-mean predictions") {
  std::vector<double> m{1, 2, 3, 4};
  std::vector<double> noise{40, -17, 33, 0};
  CHECK(nse(m, noise) < 0.0);
}

TEST_CASE("r2 is the squared correlation") {
  std::vector<double> m{1, 2, 3, 4};
  CHECK(r2(m, m) == doctest::Approx(1.0).epsilon(1e-12));

  // affine transforms leave it at 1 (NSE would penalize the offset)
  std::vector<double> affine(4);
  for (std::size_t i = 0; i < 4; ++i) affine[i] = 2.0 * m[i] + 7.0;
  CHECK(r2(m, affine) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nse(m, affine) < 1.0);

  // perfect negative correlation squares to 1
  std::vector<double> reversed{4, 3, 2, 1};
  CHECK(r2(m, reversed) == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> constant{2, 2, 2, 2};
  CHECK_THROWS_AS(r2(m, constant), ValidationError);
  CHECK_THROWS_AS(r2(constant, m), ValidationError);
}

TEST_CASE("r2 affine invariance on random series") {
  Rng rng(2);
  std::vector<double> m(40), p(40);
  for (std::size_t i = 0; i < 40; ++i) {
    m[i] = rng.uniform(0, 100);
    p[i] = 0.7 * m[i] + rng.uniform(-20, 20);
  }
  const double base = r2(m, p);
  std::vector<double> scaled(40);
  for (std::size_t i = 0; i < 40; ++i) scaled[i] = -3.5 * p[i] + 11.0;
  CHECK(r2(m, scaled) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("nse equals r2 after least-squares affine recalibration") {
  Rng rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 10 + rng.below(100);
    std::vector<double> m(n), q(n);
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = rng.uniform(0, 50);
      q[i] = 2.0 * m[i] + rng.uniform(-30, 30);
    }
    // independent least-squares fit of measured on the candidate predictor
    const double mean_m = std::accumulate(m.begin(), m.end(), 0.0) / n;
    const double mean_q = std::accumulate(q.begin(), q.end(), 0.0) / n;
    double cov = 0.0, var_q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cov += (m[i] - mean_m) * (q[i] - mean_q);
      var_q += (q[i] - mean_q) * (q[i] - mean_q);
    }
    const double slope = cov / var_q;
    const double intercept = mean_m - slope * mean_q;
    std::vector<double> recalibrated(n);
    for (std::size_t i = 0; i < n; ++i) {
      recalibrated[i] = intercept + slope * q[i];
    }
    CHECK(nse(m, recalibrated) ==
          doctest::Approx(r2(m, recalibrated)).epsilon(1e-9));
  }
}

TEST_CASE("all four metrics are invariant under a common permutation") {
  Rng rng(4);
  std::vector<double> m(30), p(30);
  for (std::size_t i = 0; i < 30; ++i) {
    m[i] = rng.uniform(1, 100);
    p[i] = m[i] + rng.uniform(-5, 5);
  }
  MetricsReport before = evaluate(m, p);

  std::vector<std::size_t> order(30);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::vector<double> pm(30), pp(30);
  for (std::size_t i = 0; i < 30; ++i) {
    pm[i] = m[order[i]];
    pp[i] = p[order[i]];
  }
  MetricsReport after = evaluate(pm, pp);
  CHECK(after.nrmse == doctest::Approx(before.nrmse).epsilon(1e-12));
  CHECK(after.mae == doctest::Approx(before.mae).epsilon(1e-12));
  CHECK(after.r2 == doctest::Approx(before.r2).epsilon(1e-12));
  CHECK(after.nse == doctest::Approx(before.nse).epsilon(1e-12));
}

TEST_CASE("evaluate bundles the four metrics with the sample count") {
  std::vector<double> m{1, 2, 3, 4};
  MetricsReport r = evaluate(m, m);
  CHECK(r.nrmse == 0.0);
  CHECK(r.mae == 0.0);
  CHECK(r.r2 == doctest::Approx(1.0));
  CHECK(r.nse == 1.0);
  CHECK(r.n == 4);

  const std::string json = metrics_json(r);
  CHECK(json.find("\"n\":4") != std::string::npos);
  CHECK(json.find("\"nrmse\":0") != std::string::npos);
}

TEST_CASE("metrics table renders one row per model") {
  MetricsReport a{0.1154, 385.1688, 0.9875, 0.9867, 5796};
  MetricsReport b{0.1478, 420.7925, 0.9791, 0.9781, 1449};
  const std::string table = render_metrics_table({{"DCNN_3F", a, b}});
  CHECK(table.find("DCNN_3F") != std::string::npos);
  CHECK(table.find("0.1154") != std::string::npos);
  CHECK(table.find("420.7925") != std::string::npos);
}
