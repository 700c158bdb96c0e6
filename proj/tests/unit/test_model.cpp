#include <doctest.h>

#include <cmath>
#include <vector>

#include "generators.hpp"
#include "irgld/model.hpp"
#include "irgld/quadrature.hpp"

using namespace irgld;

TEST_SUITE("model") {

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(ModelParams(3.5, 1.0, 1.0, 1.0));
  CHECK_THROWS_AS(ModelParams(1.0, 0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams(0.9, 0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams(2.0, 3.0, 1.0, 1.0), std::invalid_argument);  // sigma = 2 alpha - 1
  CHECK_THROWS_AS(ModelParams(2.0, 1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams(2.0, 1.0, 1.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams(2.0, 1.0, 0.5, 0.0), std::invalid_argument);
  try {
    ModelParams(0.9, 0.0, 1.0, 1.0);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("alpha > 1") != std::string::npos);
  }
}

TEST_CASE("json round trip") {
  const ModelParams p(2.5, -0.25, 0.3, 1.5);
  const auto j = to_json(p);
  CHECK(j.size() == 4);
  CHECK(params_from_json(j) == p);
  CHECK(j.at("w_min").get<double>() == 1.5);
}

TEST_CASE("kernel examples") {
  CHECK(kernel(2, 3, 1.0) == doctest::Approx(6.0));
  CHECK(kernel(2, 3, 0.0) == doctest::Approx(3.0));
  CHECK(kernel(2, 3, -1.0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(kernel(0.0, 3.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(kernel(-1.0, 3.0, 1.0), std::domain_error);
}

TEST_CASE("edge probability examples") {
  CHECK(edge_probability(2, 3, ModelParams(3.5, 1.0, 0.5, 1.0), 10) == doctest::Approx(0.3));
  CHECK(edge_probability(10, 10, ModelParams(3.5, 1.0, 0.7, 1.0), 50) == doctest::Approx(0.7));
  CHECK(edge_probability(1, 1, ModelParams(3.5, 1.0, 1.0, 1.0), 3) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(edge_probability(1, 1, ModelParams(3.5, 1.0, 1.0, 1.0), 0), std::domain_error);
}

TEST_CASE("weight sampling examples") {
  const WeightDist d(2.0, 1.0);
  CHECK(sample_weight(d, 1.0) == 1.0);
  CHECK(sample_weight(d, 0.25) == doctest::Approx(2.0));
  CHECK_THROWS_AS(sample_weight(d, 0.0), std::domain_error);
  CHECK(d.tail(1.0) == 1.0);
  CHECK(d.L_const() == 1.0);
}

TEST_CASE("Pareto mean from 1e6 samples") {
  const WeightDist d(3.5, 1.0);
  Stream s(2024);
  const int N = 1'000'000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double w = sample_weight(d, s.uniform_pos());
    sum += w;
    sum2 += w * w;
  }
  const double mean = sum / N;
  const double se = std::sqrt((sum2 / N - mean * mean) / N);
  CHECK(std::abs(mean - 1.4) <= 3.0 * se);
}

TEST_CASE("property: kernel symmetry and edge probability range") {
  Stream s(11);
  for (int t = 0; t < 2000; ++t) {
    const auto p = gen::params(s);
    const double a = p.w_min() * std::pow(s.uniform_pos(), -1.0);
    const double b = p.w_min() * std::pow(s.uniform_pos(), -1.0);
    CHECK(kernel(a, b, p.sigma()) == kernel(b, a, p.sigma()));
    const std::size_t n = gen::index(s, 1, 100000);
    const double pr = edge_probability(a, b, p, n);
    CHECK(pr >= 0.0);
    CHECK(pr <= p.q());
  }
}

TEST_CASE("property: edge probability monotone in each weight for sigma >= 0") {
  Stream s(12);
  for (int t = 0; t < 2000; ++t) {
    const auto p = gen::params_nonneg_sigma(s);
    const double a = p.w_min() * (1.0 + 10.0 * s.uniform());
    const double b = p.w_min() * (1.0 + 10.0 * s.uniform());
    const double a2 = a * (1.0 + s.uniform());
    const std::size_t n = gen::index(s, 1, 200);
    CHECK(edge_probability(a2, b, p, n) >= edge_probability(a, b, p, n));
  }
}

TEST_CASE("property: quantile and tail round trip, quantile decreasing") {
  Stream s(13);
  for (int t = 0; t < 5000; ++t) {
    const WeightDist d(gen::uniform(s, 1.05, 6.0), gen::uniform(s, 0.1, 3.0));
    const double u = s.uniform_pos();
    const double w = sample_weight(d, u);
    CHECK(std::abs(d.tail(w) - u) <= 1e-12 * u);
    const double u2 = u * (0.5 + 0.5 * s.uniform());
    if (u2 < u) CHECK(d.quantile(u2) > d.quantile(u));
  }
}

TEST_CASE("conditioned quantiles stay in their window") {
  const WeightDist d(2.5, 1.0);
  Stream s(14);
  for (int t = 0; t < 1000; ++t) {
    const double u = s.uniform_pos();
    const double w = d.quantile_between(u, 1.5, 2.0);
    CHECK(w >= 1.5);
    CHECK(w < 2.0 + 1e-12);
    CHECK(d.quantile_below(u, 3.0) < 3.0 + 1e-12);
  }
  CHECK_THROWS_AS(d.quantile_between(0.5, 2.0, 2.0), std::domain_error);
}

TEST_CASE("mean kernel matches direct quadrature") {
  for (double sigma : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
    const ModelParams p(3.5, sigma, 1.0, 1.0);
    const WeightDist d(p);
    for (double w : {1.0, 1.7, 5.0, 40.0}) {
      const double direct = expect_weight(d, [&](double x) { return kernel(w, x, sigma); }, 1e-10);
      CHECK(mean_kernel(w, p).total() == doctest::Approx(direct).epsilon(1e-7));
    }
  }
  // sigma = 1: E[kappa(w, W)] = w E[W]
  CHECK(mean_kernel(3.0, ModelParams(3.5, 1.0, 1.0, 1.0)).total() == doctest::Approx(3.0 * 1.4).epsilon(1e-9));
}

TEST_CASE("child weights follow the size-biased law") {
  // P(child > x | parent w) against the quadrature ratio
  const ModelParams p(2.5, 0.5, 1.0, 1.0);
  const WeightDist d(p);
  const double w = 2.0;
  const auto m = mean_kernel(w, p);
  Stream s(15);
  const int N = 200000;
  const double x = 3.0;
  int above = 0;
  for (int i = 0; i < N; ++i) {
    const double c = sample_child_weight(w, m, p, s.uniform(), s.uniform_pos());
    CHECK_FALSE(c < p.w_min());
    above += c > x;
  }
  const double num = d.tail(x) * integrate([&](double u) { return kernel(w, x * std::pow(u, -1.0 / p.alpha()), 0.5); },
                                           0.0, 1.0, 1e-10);
  const double expect = num / m.total();
  const double se = std::sqrt(expect * (1 - expect) / N);
  CHECK(std::abs(above / double(N) - expect) <= 4.0 * se);
}

TEST_CASE("kernel range on rectangles against a fine grid") {
  // Both axes share their grid points where the intervals overlap, so the
  // diagonal crossings are on the grid.
  auto axis = [](double a, double b, double c, double d) {
    std::vector<double> xs;
    for (int i = 0; i <= 200; ++i) xs.push_back(a + (b - a) * i / 200.0);
    for (int i = 0; i <= 200; ++i) {
      const double x = c + (d - c) * i / 200.0;
      if (x >= a && x <= b) xs.push_back(x);
    }
    return xs;
  };
  Stream s(16);
  for (int t = 0; t < 200; ++t) {
    const double sigma = gen::uniform(s, -1.5, 2.0);
    const double a1 = gen::uniform(s, 1.0, 3.0), b1 = a1 + gen::uniform(s, 0.01, 1.0);
    const double a2 = gen::uniform(s, 1.0, 3.0), b2 = a2 + gen::uniform(s, 0.01, 1.0);
    double lo = 1e300, hi = -1e300;
    for (double x : axis(a1, b1, a2, b2))
      for (double y : axis(a2, b2, a1, b1)) {
        const double k = kernel(x, y, sigma);
        lo = std::min(lo, k);
        hi = std::max(hi, k);
      }
    const auto r = kernel_range_on_rect(a1, b1, a2, b2, sigma);
    CHECK(r.inf == doctest::Approx(lo).epsilon(1e-9));
    CHECK(r.sup == doctest::Approx(hi).epsilon(1e-9));
  }
}

}  // TEST_SUITE
