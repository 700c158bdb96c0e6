#include "irgld/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "irgld/parallel.hpp"

namespace irgld {

GeneratorPath parse_generator_path(const std::string& name) {
  if (name == "pairwise") return GeneratorPath::pairwise;
  if (name == "bucketed") return GeneratorPath::bucketed;
  throw std::invalid_argument("unknown generator path '" + name + "' (expected pairwise or bucketed)");
}

const char* to_string(GeneratorPath path) {
  return path == GeneratorPath::pairwise ? "pairwise" : "bucketed";
}

namespace {

constexpr std::size_t kEdgeChunks = 64;

struct PairProbability {
  const ModelParams& params;
  std::span<const double> w;
  std::vector<double> wpow;
  double inv_n;

  PairProbability(const ModelParams& p, std::span<const double> weights, std::size_t n_model)
      : params(p), w(weights), wpow(weights.size()), inv_n(1.0 / static_cast<double>(n_model)) {
    const double s = p.sigma();
    for (std::size_t i = 0; i < w.size(); ++i) wpow[i] = s == 1.0 ? w[i] : std::pow(w[i], s);
  }

  double operator()(std::uint32_t u, std::uint32_t v) const noexcept {
    const bool u_hi = w[u] >= w[v];
    const double k = u_hi ? w[u] * wpow[v] : w[v] * wpow[u];
    return params.q() * std::min(k * inv_n, 1.0);
  }
};

std::vector<Edge> pairwise_edges(const PairProbability& prob, std::uint64_t key, unsigned threads) {
  const std::size_t n = prob.w.size();
  if (n < 2) return {};
  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  std::vector<std::size_t> bounds(kEdgeChunks + 1, n);
  bounds[0] = 1;
  for (std::size_t c = 1; c < kEdgeChunks; ++c) {
    const double target = total * static_cast<double>(c) / kEdgeChunks;
    auto v = static_cast<std::size_t>(std::ceil(0.5 + std::sqrt(0.25 + 2.0 * target)));
    bounds[c] = std::clamp(v, bounds[c - 1], n);
  }
  std::vector<std::vector<Edge>> parts(kEdgeChunks);
  parallel_chunks(kEdgeChunks, kEdgeChunks, threads, [&](std::size_t c, std::size_t, std::size_t) {
    auto& out = parts[c];
    for (std::size_t v = bounds[c]; v < bounds[c + 1]; ++v) {
      const auto vv = static_cast<std::uint32_t>(v);
      const std::uint64_t base = pair_index(0, vv);
      for (std::uint32_t u = 0; u < vv; ++u) {
        const double p = prob(u, vv);
        if (to_unit_closed_open(bits_at(key, base + u)) < p) out.push_back({u, vv});
      }
    }
  });
  std::vector<Edge> edges;
  for (auto& p : parts) edges.insert(edges.end(), p.begin(), p.end());
  return edges;
}

// Maps k in [0, m(m-1)/2) to (i, j) with i < j in the same order as pair_index.
std::pair<std::uint64_t, std::uint64_t> triangular_pair(std::uint64_t k) {
  auto j = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(k))) / 2.0);
  while (j * (j - 1) / 2 > k) --j;
  while ((j + 1) * j / 2 <= k) ++j;
  return {k - j * (j - 1) / 2, j};
}

std::vector<Edge> bucketed_edges(const PairProbability& prob, std::uint64_t key, unsigned threads) {
  const std::size_t n = prob.w.size();
  if (n < 2) return {};
  const double wm = prob.params.w_min();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return prob.w[a] != prob.w[b] ? prob.w[a] < prob.w[b] : a < b;
  });
  // contiguous dyadic buckets in sorted order
  std::vector<std::size_t> start{0};
  auto bucket_of = [&](double x) { return static_cast<long>(std::floor(std::log2(x / wm))); };
  for (std::size_t i = 1; i < n; ++i)
    if (bucket_of(prob.w[order[i]]) != bucket_of(prob.w[order[i - 1]])) start.push_back(i);
  start.push_back(n);
  const std::size_t nb = start.size() - 1;

  struct Task {
    std::size_t a, b;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < nb; ++a)
    for (std::size_t b = a; b < nb; ++b) tasks.push_back({a, b});

  std::vector<std::vector<Edge>> parts(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t t) {
    const auto [a, b] = tasks[t];
    const std::size_t a0 = start[a], na = start[a + 1] - start[a];
    const std::size_t b0 = start[b], nbk = start[b + 1] - start[b];
    const double lo_a = prob.w[order[a0]], hi_a = prob.w[order[a0 + na - 1]];
    const double lo_b = prob.w[order[b0]], hi_b = prob.w[order[b0 + nbk - 1]];
    const double sup = kernel_range_on_rect(lo_a, hi_a, lo_b, hi_b, prob.params.sigma()).sup;
    const double pbar = prob.params.q() * std::min(sup * prob.inv_n, 1.0);
    const std::uint64_t total = a == b ? static_cast<std::uint64_t>(na) * (na - 1) / 2
                                       : static_cast<std::uint64_t>(na) * nbk;
    if (total == 0 || pbar <= 0.0) return;
    Stream rng = Stream::from_key(derive_key(key, a * nb + b));
    const double log_fail = std::log1p(-pbar);
    auto& out = parts[t];
    // `next` is one past the last candidate visited
    std::uint64_t next = 0;
    while (next < total) {
      std::uint64_t k = next;
      if (pbar < 1.0) {
        const double skip = std::floor(std::log(rng.uniform_pos()) / log_fail);
        if (skip >= static_cast<double>(total - next)) break;
        k += static_cast<std::uint64_t>(skip);
      }
      next = k + 1;
      std::uint32_t u, v;
      if (a == b) {
        const auto [i, j] = triangular_pair(k);
        u = order[a0 + i];
        v = order[a0 + j];
      } else {
        u = order[a0 + k / nbk];
        v = order[b0 + k % nbk];
      }
      const double p = prob(u, v);
      if (rng.uniform() * pbar < p) out.push_back({std::min(u, v), std::max(u, v)});
    }
  });
  std::vector<Edge> edges;
  for (auto& p : parts) edges.insert(edges.end(), p.begin(), p.end());
  return edges;
}

}  // namespace

std::vector<Edge> sample_edges(const ModelParams& params, std::span<const double> weights, std::size_t n_model,
                               Stream edges, GeneratorPath path, unsigned threads) {
  if (n_model == 0) throw std::domain_error("n_model must be >= 1");
  if (weights.size() > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("too many vertices");
  for (double w : weights)
    if (!(w >= params.w_min())) throw std::domain_error("vertex weight below w_min");
  PairProbability prob(params, weights, n_model);
  auto out = path == GeneratorPath::pairwise ? pairwise_edges(prob, edges.key(), threads)
                                             : bucketed_edges(prob, edges.key(), threads);
  std::sort(out.begin(), out.end());
  return out;
}

Graph generate_on_weights(const ModelParams& params, std::vector<double> weights, std::size_t n_model,
                          std::uint64_t seed, GeneratorPath path, unsigned threads) {
  Graph g{params, n_model, std::move(weights), {}, seed};
  g.edges = sample_edges(params, g.weights, n_model, edge_stream(seed), path, threads);
  return g;
}

Graph generate(const ModelParams& params, std::size_t n, std::uint64_t seed, const GenerateOptions& options) {
  const WeightDist dist(params);
  if (options.weight_window && !(options.weight_window->lo < options.weight_window->hi))
    throw std::domain_error("empty weight window");
  if (options.weight_window && options.weight_window->lo < params.w_min())
    throw std::domain_error("weight window must start at or above w_min");
  for (double w : options.planted_weights)
    if (!(w >= params.w_min())) throw std::domain_error("planted weight below w_min");
  if (options.hub_cutoff && !(*options.hub_cutoff > params.w_min()))
    throw std::domain_error("hub cutoff must exceed w_min");

  const auto& planted = options.planted_weights;
  const std::size_t h = planted.size();
  const bool replace = options.plant_mode == PlantMode::replace_top;
  if (replace && h > n) throw std::invalid_argument("more planted vertices than n");

  const std::size_t sampled = (replace && options.hub_cutoff) ? n - h : n;
  Stream ws = weight_stream(seed);
  std::vector<double> weights(sampled);
  for (std::size_t i = 0; i < sampled; ++i) {
    const double u = ws.uniform_pos();
    weights[i] = options.hub_cutoff ? dist.quantile_below(u, *options.hub_cutoff) : dist.quantile(u);
  }

  std::size_t n_model = n;
  if (replace && !options.hub_cutoff) {
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(h), idx.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        return weights[a] != weights[b] ? weights[a] > weights[b] : a < b;
                      });
    std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(h));
    for (std::size_t j = 0; j < h; ++j) weights[idx[j]] = planted[j];
  } else {
    weights.insert(weights.end(), planted.begin(), planted.end());
    if (!replace && options.denominator_includes_planted) n_model = n + h;
  }

  if (options.weight_window) {
    const auto [lo, hi] = *options.weight_window;
    std::vector<double> kept;
    kept.reserve(weights.size());
    for (double w : weights)
      if (w >= lo && w < hi) kept.push_back(w);
    weights = std::move(kept);
  }
  return generate_on_weights(params, std::move(weights), std::max<std::size_t>(n_model, 1), seed, options.path,
                             options.threads);
}

double expected_edge_count(const ModelParams& params, std::span<const double> weights, std::size_t n_model) {
  PairProbability prob(params, weights, n_model);
  double total = 0.0;
  for (std::uint32_t v = 1; v < weights.size(); ++v)
    for (std::uint32_t u = 0; u < v; ++u) total += prob(u, v);
  return total;
}

void write_edge_list(const Graph& g, std::ostream& os) {
  char buf[64];
  os << g.vertex_count() << ' ' << g.seed << '\n';
  for (double w : g.weights) {
    std::snprintf(buf, sizeof buf, "%.17g", w);
    os << buf << '\n';
  }
  for (const auto& e : g.edges) os << e.u << ' ' << e.v << '\n';
}

Graph read_edge_list(std::istream& is, const ModelParams& params) {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  if (!(is >> n >> seed)) throw std::runtime_error("edge list: bad header");
  Graph g{params, n, std::vector<double>(n), {}, seed};
  for (auto& w : g.weights)
    if (!(is >> w)) throw std::runtime_error("edge list: truncated weights");
  std::uint64_t u = 0, v = 0;
  while (is >> u >> v) {
    if (u >= n || v >= n || u == v) throw std::runtime_error("edge list: invalid edge");
    g.edges.push_back({static_cast<std::uint32_t>(std::min(u, v)), static_cast<std::uint32_t>(std::max(u, v))});
  }
  std::sort(g.edges.begin(), g.edges.end());
  if (std::adjacent_find(g.edges.begin(), g.edges.end()) != g.edges.end())
    throw std::runtime_error("edge list: duplicate edge");
  return g;
}

}  // namespace irgld
