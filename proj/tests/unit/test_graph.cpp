#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "generators.hpp"
#include "irgld/graph.hpp"

using namespace irgld;

namespace {

bool well_formed(const Graph& g) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& e : g.edges) {
    if (!(e.u < e.v) || e.v >= g.vertex_count()) return false;
    if (!seen.insert({e.u, e.v}).second) return false;
  }
  return std::is_sorted(g.edges.begin(), g.edges.end());
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("pair index enumerates pairs densely") {
  std::uint64_t next = 0;
  for (std::uint32_t v = 1; v < 40; ++v)
    for (std::uint32_t u = 0; u < v; ++u) CHECK(pair_index(u, v) == next++);
}

TEST_CASE("generator path names") {
  CHECK(parse_generator_path("pairwise") == GeneratorPath::pairwise);
  CHECK(parse_generator_path("bucketed") == GeneratorPath::bucketed);
  CHECK(std::string(to_string(GeneratorPath::bucketed)) == "bucketed");
  CHECK_THROWS_AS(parse_generator_path("fast"), std::invalid_argument);
}

TEST_CASE("single vertex has no edges") {
  const auto g = generate(ModelParams(3.5, 1.0, 1.0, 1.0), 1, 7);
  CHECK(g.vertex_count() == 1);
  CHECK(g.edges.empty());
}

TEST_CASE("saturated kernel gives the complete graph") {
  for (auto path : {GeneratorPath::pairwise, GeneratorPath::bucketed}) {
    const std::vector<double> w(30, 10.0);  // 10 * 10 / 30 >= 1
    const auto g = generate_on_weights(ModelParams(3.5, 1.0, 1.0, 1.0), w, 30, 3, path);
    CHECK(g.edges.size() == 30 * 29 / 2);
    CHECK(well_formed(g));
  }
}

TEST_CASE("mean edge count matches the sum of pair probabilities") {
  const ModelParams p(3.5, 1.0, 1.0, 1.0);
  for (auto path : {GeneratorPath::pairwise, GeneratorPath::bucketed}) {
    double sum = 0.0, sum2 = 0.0, expect = 0.0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
      GenerateOptions o;
      o.path = path;
      const auto g = generate(p, 2000, 100 + s, o);
      const double m = static_cast<double>(g.edges.size());
      sum += m;
      sum2 += m * m;
      // conditional mean on each sampled weight sequence
      expect += expected_edge_count(p, g.weights, g.n_model);
    }
    const double mean = sum / seeds;
    const double var = sum2 / seeds - mean * mean;
    CHECK(std::abs(mean - expect / seeds) <= 3.0 * std::sqrt(var / seeds));
  }
}

TEST_CASE("pairwise and bucketed paths agree in distribution") {
  // Per-pair edge frequencies on a fixed heterogeneous weight sequence.
  const ModelParams p(2.2, 0.7, 0.8, 1.0);
  Stream ws(5);
  const auto w = gen::weights(ws, 60, 1.0, 2.2);
  const std::size_t n = 60;
  const int reps = 3000;
  std::vector<int> pair_count(n * (n - 1) / 2), bucket_count(n * (n - 1) / 2);
  for (int r = 0; r < reps; ++r) {
    for (const auto& e : sample_edges(p, w, n, Stream(1000 + r), GeneratorPath::pairwise, 1))
      ++pair_count[pair_index(e.u, e.v)];
    for (const auto& e : sample_edges(p, w, n, Stream(1000 + r), GeneratorPath::bucketed, 1))
      ++bucket_count[pair_index(e.u, e.v)];
  }
  int outliers = 0;
  double chi_total = 0.0;
  for (std::uint32_t v = 1; v < n; ++v)
    for (std::uint32_t u = 0; u < v; ++u) {
      const double pr = edge_probability(w[u], w[v], p, n);
      const double se = std::sqrt(std::max(pr * (1 - pr), 1e-12) / reps);
      const double zb = (bucket_count[pair_index(u, v)] / double(reps) - pr) / se;
      const double zp = (pair_count[pair_index(u, v)] / double(reps) - pr) / se;
      if (pr > 0.0 && pr < 1.0) chi_total += zb * zb;
      outliers += std::abs(zb) > 4.5;
      outliers += std::abs(zp) > 4.5;
    }
  CHECK(outliers == 0);
  // sum of squared z-scores over 1770 pairs: mean 1770, sd about 60
  CHECK(chi_total < 1770 + 6 * 60);
}

TEST_CASE("generation is reproducible and independent of the thread count") {
  const ModelParams p(2.5, 0.5, 0.7, 1.0);
  for (auto path : {GeneratorPath::pairwise, GeneratorPath::bucketed}) {
    GenerateOptions a, b;
    a.path = b.path = path;
    a.threads = 1;
    b.threads = 4;
    const auto g1 = generate(p, 3000, 99, a);
    const auto g2 = generate(p, 3000, 99, a);
    const auto g3 = generate(p, 3000, 99, b);
    CHECK(g1.edges == g2.edges);
    CHECK(g1.edges == g3.edges);
    CHECK(g1.weights == g3.weights);
    CHECK(well_formed(g1));
  }
}

TEST_CASE("property: graphs are well formed") {
  Stream s(21);
  for (int t = 0; t < 40; ++t) {
    const auto p = gen::params(s);
    const std::size_t n = gen::index(s, 1, 400);
    GenerateOptions o;
    o.path = s.uniform() < 0.5 ? GeneratorPath::pairwise : GeneratorPath::bucketed;
    const auto g = generate(p, n, t, o);
    CHECK(well_formed(g));
    CHECK(g.vertex_count() == n);
    for (double w : g.weights) CHECK(w >= p.w_min());
  }
}

TEST_CASE("property: raising one weight never removes its edges (pairwise, sigma >= 0, q = 1)") {
  Stream s(22);
  for (int t = 0; t < 60; ++t) {
    auto p = gen::params_nonneg_sigma(s);
    p = p.with_q(1.0);
    const std::size_t n = gen::index(s, 2, 150);
    auto w = gen::weights(s, n, p.w_min(), p.alpha());
    const auto before = generate_on_weights(p, w, n, 500 + t);
    const std::size_t v = gen::index(s, 0, n - 1);
    w[v] *= 1.0 + 5.0 * s.uniform();
    const auto after = generate_on_weights(p, w, n, 500 + t);
    for (const auto& e : before.edges)
      if (e.u == v || e.v == v) CHECK(std::binary_search(after.edges.begin(), after.edges.end(), e));
  }
}

TEST_CASE("weight window keeps the original denominator") {
  const ModelParams p(2.5, 1.0, 1.0, 1.0);
  GenerateOptions o;
  o.weight_window = WeightWindow{1.0, 2.0};
  const auto g = generate(p, 5000, 4, o);
  CHECK(g.n_model == 5000);
  CHECK(g.vertex_count() < 5000);
  for (double w : g.weights) {
    CHECK(w >= 1.0);
    CHECK(w < 2.0);
  }
  // induced subgraph of the unrestricted graph on the same seed
  const auto full = generate(p, 5000, 4);
  std::size_t kept = 0;
  for (double w : full.weights) kept += w < 2.0;
  CHECK(kept == g.vertex_count());
  o.weight_window = WeightWindow{2.0, 2.0};
  CHECK_THROWS_AS(generate(p, 100, 4, o), std::domain_error);
  o.weight_window = WeightWindow{0.5, 2.0};
  CHECK_THROWS_AS(generate(p, 100, 4, o), std::domain_error);
}

TEST_CASE("planted weights") {
  const ModelParams p(2.5, 1.0, 0.5, 1.0);
  GenerateOptions o;
  o.planted_weights = {500.0, 300.0};
  const auto g = generate(p, 1000, 8, o);
  CHECK(g.vertex_count() == 1000);
  CHECK(g.n_model == 1000);
  CHECK(std::count(g.weights.begin(), g.weights.end(), 500.0) == 1);
  CHECK(std::count(g.weights.begin(), g.weights.end(), 300.0) == 1);

  o.hub_cutoff = 100.0;
  const auto c = generate(p, 1000, 8, o);
  CHECK(c.vertex_count() == 1000);
  for (std::size_t i = 0; i + 2 < c.vertex_count(); ++i) CHECK(c.weights[i] < 100.0);
  CHECK(c.weights[998] == 500.0);

  o.hub_cutoff.reset();
  o.plant_mode = PlantMode::append;
  const auto a = generate(p, 1000, 8, o);
  CHECK(a.vertex_count() == 1002);
  CHECK(a.n_model == 1002);
  o.denominator_includes_planted = false;
  CHECK(generate(p, 1000, 8, o).n_model == 1000);

  o.planted_weights = {0.5};
  CHECK_THROWS_AS(generate(p, 10, 1, o), std::domain_error);
}

TEST_CASE("edge list round trip") {
  const ModelParams p(2.5, 0.3, 0.6, 1.0);
  const auto g = generate(p, 300, 17);
  std::stringstream ss;
  write_edge_list(g, ss);
  const auto r = read_edge_list(ss, p);
  CHECK(r.weights == g.weights);
  CHECK(r.edges == g.edges);
  CHECK(r.seed == g.seed);

  std::stringstream bad("3 1\n1\n1\n1\n0 0\n");
  CHECK_THROWS(read_edge_list(bad, p));
  std::stringstream dup("3 1\n1\n1\n1\n0 1\n1 0\n");
  CHECK_THROWS(read_edge_list(dup, p));
}

}  // TEST_SUITE
