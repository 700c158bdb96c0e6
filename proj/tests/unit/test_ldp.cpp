#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "irgld/ldp.hpp"
#include "irgld/quadrature.hpp"

using namespace irgld;

namespace {

TreePool singleton_pool(const ModelParams& p, std::size_t m = 20) {
  std::vector<ProgenySample> s(m, ProgenySample{1, false, 0, {p.w_min()}});
  return TreePool::from_samples(p, s, 100);
}

const TreePool& shared_pool() {
  static const TreePool pool = build_pool(ModelParams(2.5, 1.0, 0.5, 1.0), 20000, 2000, 2718);
  return pool;
}

}  // namespace

TEST_SUITE("ldp") {

TEST_CASE("hubs case split") {
  const auto& pool = shared_pool();
  const auto th = estimate_theta(pool);
  const auto below = hubs(th.theta * 0.9, pool);
  CHECK(below.value == 0.0);
  CHECK(below.ceil == 0);
  CHECK(below.status == HubsStatus::below_theta);
  CHECK(hubs(0.0, pool).value == 0.0);

  const auto q1 = build_pool(ModelParams(2.5, 1.0, 1.0, 1.0), 5000, 500, 3);
  const auto r = hubs(0.95, q1);
  CHECK(r.value == 1.0);
  CHECK(r.ceil == 1);
  CHECK(r.status == HubsStatus::q_one);

  CHECK_THROWS_AS(hubs(1.0, pool), std::domain_error);
  CHECK_THROWS_AS(hubs(-0.1, pool), std::domain_error);
  CHECK_THROWS_AS(hubs(0.8, 0.3, pool), std::invalid_argument);
  CHECK(hubs(0.8, 0.5, pool).value == hubs(0.8, pool).value);
}

TEST_CASE("hubs on single-vertex trees solves 2^-h = 1 - rho") {
  const auto pool = singleton_pool(ModelParams(3.5, 1.0, 0.5, 1.0));
  const auto r = hubs(0.75, pool);
  CHECK(std::abs(r.value - 2.0) <= 1e-8);
  CHECK(r.status == HubsStatus::integer_point);
  CHECK(std::abs(hubs_via_inverse(0.75, pool) - 2.0) <= 1e-6);
  CHECK(std::abs(hubs(0.7, pool).value - std::log2(1.0 / 0.3)) <= 1e-8);
  CHECK(hubs(0.7, pool).status == HubsStatus::interior);
}

TEST_CASE("two hubs definitions agree") {
  const auto& pool = shared_pool();
  for (double rho : {0.6, 0.7, 0.8, 0.9, 0.97})
    CHECK(std::abs(hubs(rho, pool).value - hubs_via_inverse(rho, pool)) <= 1e-6);
}

TEST_CASE("property: hubs monotone in rho and q on shared pools") {
  Stream s(61);
  for (int t = 0; t < 4; ++t) {
    const auto p = gen::params(s);
    std::vector<TreePool> pools;
    for (double q : {0.1, 0.2, 0.3, 0.4, 0.5}) pools.push_back(build_pool(p.with_q(q), 3000, 300, 80 + t));
    std::vector<double> rhos;
    for (int i = 0; i < 12; ++i) rhos.push_back(0.05 + 0.9 * s.uniform());
    std::sort(rhos.begin(), rhos.end());
    for (std::size_t k = 0; k < pools.size(); ++k)
      for (std::size_t i = 0; i < rhos.size(); ++i) {
        const double h = hubs(rhos[i], pools[k]).value;
        if (i > 0) CHECK(h >= hubs(rhos[i - 1], pools[k]).value);
        if (k > 0) CHECK(h <= hubs(rhos[i], pools[k - 1]).value);
      }
  }
}

TEST_CASE("asymptotic hubs") {
  CHECK(hubs_asymptotic(0.75, 0.5) == doctest::Approx(2.0));
  CHECK(hubs_asymptotic(0.5, 0.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(hubs_asymptotic(0.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(hubs_asymptotic(1.0, 0.5), std::domain_error);
}

TEST_CASE("refined asymptotics") {
  // sigma = 1: the correction is log E[exp(-q E[W] W)] / log(1/(1-q))
  const ModelParams p(3.5, 1.0, 0.5, 1.0);
  const double e = expect_weight(WeightDist(p), [](double w) { return std::exp(-0.5 * 1.4 * w); }, 1e-12);
  CHECK(hubs_asymptotic_refined(0.9, p) ==
        doctest::Approx(hubs_asymptotic(0.9, 0.5) + std::log(e) / std::log(2.0)).epsilon(1e-9));
  // same value through the sigma != 1 quadrature branch at sigma close to 1
  CHECK(hubs_asymptotic_refined(0.9, p.with_sigma(1.0 - 1e-9)) ==
        doctest::Approx(hubs_asymptotic_refined(0.9, p)).epsilon(1e-6));

  const auto pool = build_pool(p, 50000, 200, 5);
  CHECK(std::abs(hubs_asymptotic_refined(0.999, p) - hubs(0.999, pool).value) < 0.2);
  // correction is negligible relative to the leading term as rho -> 1
  const double corr = hubs_asymptotic_refined(0.999999, p) - hubs_asymptotic(0.999999, 0.5);
  CHECK(std::abs(corr) / hubs_asymptotic(0.999999, 0.5) < 0.1);
}

TEST_CASE("Y membership examples") {
  const auto& pool = shared_pool();
  const double th = estimate_theta(pool).theta;
  const std::vector<double> tiny{1e-12, 1e-12};
  CHECK_FALSE(y_membership(tiny, th + 0.05, pool));
  const auto q1 = build_pool(ModelParams(2.5, 1.0, 1.0, 1.0), 3000, 300, 6);
  const std::vector<double> one{1.0};
  CHECK(y_membership(one, 0.9, q1));
  const auto ones = singleton_pool(ModelParams(2.0, 0.0, 1.0, 1.0));
  for (double y1 : {0.2, 0.49, 0.5, 0.51, 0.8, 2.0}) {
    const std::vector<double> y{y1};
    CHECK(y_membership(y, 0.5, ones) == (y1 >= 0.5));
  }
  const std::vector<double> bad{0.5, 0.0};
  CHECK_THROWS_AS(y_membership(bad, 0.5, pool), std::domain_error);
}

TEST_CASE("property: Y membership monotone in y and nested in rho") {
  const auto& pool = shared_pool();
  Stream s(62);
  int members = 0;
  for (int t = 0; t < 400; ++t) {
    auto y = gen::hub_vector(s, gen::index(s, 1, 3));
    const double rho = gen::uniform(s, 0.55, 0.95);
    const bool in = y_membership(y, rho, pool);
    members += in;
    if (in) CHECK(y_membership(y, rho - 0.05 * s.uniform(), pool));
    y[gen::index(s, 0, y.size() - 1)] *= 1.0 + 4.0 * s.uniform();
    if (in) CHECK(y_membership(y, rho, pool));
  }
  CHECK(members > 20);
}

TEST_CASE("phi threshold") {
  const auto q1 = build_pool(ModelParams(2.5, 0.5, 1.0, 1.3), 5000, 500, 7);
  const double rho = 0.5 * (1.0 + estimate_theta(q1).ci.hi);
  const auto t = phi_threshold(rho, 1, q1);
  REQUIRE(t.found);
  CHECK(t.phi < std::pow(1.3, -0.5));

  const auto& pool = shared_pool();
  const double th = estimate_theta(pool).ci.hi;
  const auto near = phi_threshold(th + 0.01, 1, pool);
  const auto far = phi_threshold(th + 0.2, 1, pool);
  REQUIRE(near.found);
  REQUIRE(far.found);
  // with h fixed the admissible region grows with rho
  CHECK(near.phi < far.phi);
  CHECK_THROWS_AS(phi_threshold(0.8, 0, pool), std::invalid_argument);
}

TEST_CASE("y with a coordinate below phi/2 is never a member") {
  const auto& pool = shared_pool();
  const double rho = estimate_theta(pool).theta + 0.15;
  const auto h = hubs(rho, pool).ceil;
  const auto t = phi_threshold(rho, h, pool);
  REQUIRE(t.found);
  Stream s(63);
  for (int k = 0; k < 2000; ++k) {
    auto y = gen::hub_vector(s, h);
    for (auto& v : y) v *= 50.0;
    y[gen::index(s, 0, h - 1)] = t.phi * 0.5 * s.uniform_pos();
    CHECK_FALSE(y_membership(y, rho, pool));
  }
}

TEST_CASE("closed-form constant on single-vertex trees") {
  const auto ones = singleton_pool(ModelParams(2.0, 0.0, 1.0, 1.0));
  const auto t = phi_threshold(0.5, 1, ones);
  REQUIRE(t.found);
  CHECK(t.phi < 0.5);
  const auto c = estimate_C(0.5, ones, t.phi, 1, 200000, 9);
  CHECK(c.ci.lo <= 4.0 * (1 + 1e-12));
  CHECK(4.0 * (1 - 1e-12) <= c.ci.hi);
  CHECK(c.accepted == c.member_levels.size());
  // below the threshold only part of the draws land in Y
  const auto d = estimate_C(0.5, ones, 0.3, 1, 200000, 9);
  CHECK(d.accepted < d.draws);
  CHECK(std::abs(d.C - 4.0) <= 3.0 * (d.ci.hi - d.ci.lo) / (2 * 1.959963984540054));
}

TEST_CASE("constant estimates are stable under draws and phi") {
  const auto& pool = shared_pool();
  const double rho = estimate_theta(pool).theta + 0.15;
  const auto h = hubs(rho, pool).ceil;
  const double phi = phi_threshold(rho, h, pool).phi;
  const auto a = estimate_C(rho, pool, phi, h, 4000, 1);
  const auto b = estimate_C(rho, pool, phi, h, 8000, 2);
  const auto c = estimate_C(rho, pool, 0.5 * phi, h, 8000, 3);
  CHECK(a.C > 0.0);
  CHECK(std::max(a.ci.lo, b.ci.lo) <= std::min(a.ci.hi, b.ci.hi));
  CHECK(std::max(c.ci.lo, b.ci.lo) <= std::min(c.ci.hi, b.ci.hi));
  // independent of the thread count
  const auto d = estimate_C(rho, pool, phi, h, 4000, 1, 3);
  CHECK(d.C == a.C);
  CHECK(d.member_levels.size() == a.member_levels.size());
}

TEST_CASE("constant with no hits") {
  const auto ones = singleton_pool(ModelParams(2.0, 0.0, 1.0, 1.0));
  // with q = 0.5 one hub removes at most half of the mass
  const auto half = singleton_pool(ModelParams(2.0, 0.0, 0.5, 1.0));
  const auto c = estimate_C(0.6, half, 0.1, 1, 1000, 4);
  CHECK(c.no_hits);
  CHECK(c.C == 0.0);
  CHECK(c.ci.hi > 0.0);
  CHECK_THROWS_AS(estimate_C(0.5, ones, 0.0, 1, 10, 1), std::domain_error);
}

TEST_CASE("C ratio curve") {
  const auto ones = singleton_pool(ModelParams(2.0, 0.0, 1.0, 1.0));
  const auto c = estimate_C(0.5, ones, 0.4, 1, 50000, 10);
  const std::vector<double> s{0.5, 0.6, 0.8, 1.0};
  const auto r = c_ratio_curve(c, s);
  CHECK(r[0] == doctest::Approx(1.0));
  // C_s / C_0.5 = (0.5 / s)^2 for s < 1
  CHECK(r[1] == doctest::Approx(std::pow(0.5 / 0.6, 2)).epsilon(0.03));
  CHECK(r[2] == doctest::Approx(std::pow(0.5 / 0.8, 2)).epsilon(0.05));
  CHECK(r[1] >= r[2]);
}

TEST_CASE("sample member") {
  const auto& pool = shared_pool();
  const double rho = estimate_theta(pool).theta + 0.1;
  const auto h = hubs(rho, pool).ceil;
  const double phi = phi_threshold(rho, h, pool).phi;
  Stream s(64);
  for (int k = 0; k < 20; ++k) {
    const auto y = sample_member(rho, pool, phi, h, s);
    CHECK(y.size() == h);
    CHECK(std::is_sorted(y.rbegin(), y.rend()));
    CHECK(y_membership(y, rho, pool));
  }
}

TEST_CASE("rate function") {
  const auto& pool = shared_pool();
  const double th = estimate_theta(pool).theta;
  CHECK(rate_function(th, pool) == 0.0);
  CHECK(rate_function(1.0, pool) == kInfinity);
  CHECK(rate_function(th - 0.1, pool) == kInfinity);
  const auto ones = singleton_pool(ModelParams(3.0, 1.0, 0.5, 1.0));
  CHECK(hubs(0.7, ones).ceil == 2);
  CHECK(rate_function(0.7, ones) == doctest::Approx(4.0));
}

TEST_CASE("tail prediction scaling") {
  const ModelParams p(2.5, 1.0, 0.5, 1.0);
  LdpQuantities l;
  l.C = 3.0;
  l.hubs_ceil = 2;
  const auto a = upper_tail_prediction(0.8, 1000, p, l);
  const auto b = upper_tail_prediction(0.8, 2000, p, l);
  CHECK(a.value == doctest::Approx(3.0 * std::pow(1000.0 * std::pow(1000.0, -2.5), 2)));
  CHECK(b.value / a.value == doctest::Approx(std::pow(2.0, -1.5 * 2)));
  l.hubs_ceil = 3;
  CHECK(upper_tail_prediction(0.8, 1000, p, l).value / a.value == doctest::Approx(std::pow(1000.0, -1.5)));
  l.status = HubsStatus::integer_point;
  CHECK(upper_tail_prediction(0.8, 1000, p, l).bounds_only);
  l.hubs_ceil = 0;
  CHECK_THROWS_AS(upper_tail_prediction(0.8, 1000, p, l), std::domain_error);
}

TEST_CASE("ldp quantities") {
  const auto& pool = shared_pool();
  const double th = estimate_theta(pool).theta;
  const auto below = compute_ldp(th * 0.5, pool);
  CHECK(below.hubs_value == 0.0);
  CHECK(below.rate == kInfinity);
  CHECK(compute_ldp(th, pool).rate == 0.0);
  const auto l = compute_ldp(th + 0.15, pool, {5000, 1, 1, 0.0});
  CHECK(l.hubs_value > 0.0);
  CHECK(l.rate == doctest::Approx(1.5 * static_cast<double>(l.hubs_ceil)));
  CHECK(l.phi_found);
  CHECK(l.C > 0.0);
  const auto j = to_json(l);
  CHECK(j.at("hubs_ceil").get<std::size_t>() == l.hubs_ceil);
  CHECK(j.at("C_ci").size() == 2);
  LdpQuantities inf;
  inf.rate = kInfinity;
  CHECK(to_json(inf).at("rate") == "inf");
}

}  // TEST_SUITE
