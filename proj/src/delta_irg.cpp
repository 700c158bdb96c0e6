#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "irgld/graph.hpp"

namespace irgld {

namespace {

constexpr double kGridTol = 1e-9;
constexpr std::size_t kConditionedTries = 5'000'000;

// log of the Poisson(lambda) pmf at k
double log_poisson_pmf(double lambda, double k) {
  if (lambda <= 0.0) return k == 0.0 ? 0.0 : -INFINITY;
  return k * std::log(lambda) - lambda - std::lgamma(k + 1.0);
}

// Poisson(lambda) conditioned on X >= lo, by inversion starting at lo.
std::size_t truncated_poisson(double lambda, std::size_t lo, Stream& rng) {
  const double tail = lo == 0 ? 1.0 : boost::math::gamma_p(static_cast<double>(lo), lambda);
  double k = static_cast<double>(lo);
  double pmf = std::exp(log_poisson_pmf(lambda, k));
  if (!(tail > 0.0) || !(pmf > 0.0)) return lo;
  double target = rng.uniform() * tail;
  while (target >= pmf) {
    target -= pmf;
    k += 1.0;
    pmf *= lambda / k;
    if (pmf < 1e-300 && k > lambda) break;
  }
  return static_cast<std::size_t>(k);
}

}  // namespace

std::size_t DeltaIrgModel::level_of(double w) const {
  if (!(w >= w_min) || !(w < R)) throw std::domain_error("weight outside [w_min, R)");
  const auto i = static_cast<std::size_t>(std::floor((w - w_min) / delta));
  return std::min(i, z_levels.size() - 1);
}

std::size_t level_count(std::size_t n, double delta, double mass) {
  const double x = (1.0 - delta) * static_cast<double>(n) * mass;
  return static_cast<std::size_t>(std::ceil(x - kGridTol * std::max(1.0, x)));
}

DeltaIrgModel build_delta_irg(const ModelParams& params, std::size_t n, double delta, double R) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in (0, 1)");
  const double wm = params.w_min();
  if (!(R > wm)) throw std::domain_error("R must exceed w_min");
  const double ratio = (R - wm) / delta;
  const double levels = std::round(ratio);
  if (levels < 1.0 || std::abs(ratio - levels) > kGridTol * std::max(1.0, ratio))
    throw std::domain_error("(R - w_min) / delta must be a positive integer");
  const WeightDist dist(params);
  DeltaIrgModel m;
  m.delta = delta;
  m.R = R;
  m.w_min = wm;
  m.n = n;
  const auto k = static_cast<std::size_t>(levels);
  for (std::size_t i = 0; i < k; ++i) {
    const double z = wm + static_cast<double>(i) * delta;
    const double z_next = i + 1 == k ? R : wm + static_cast<double>(i + 1) * delta;
    m.z_levels.push_back(z);
    m.level_mass.push_back(dist.mass(z, z_next));
    m.counts.push_back(level_count(n, delta, m.level_mass.back()));
    m.n_total += m.counts.back();
  }
  return m;
}

double kernel_delta(double w1, double w2, const DeltaIrgModel& model, double sigma) {
  if (!(w1 < model.R) || !(w2 < model.R)) return 0.0;
  const std::size_t i = model.level_of(w1);
  const std::size_t j = model.level_of(w2);
  auto upper = [&](std::size_t l) { return l + 1 == model.z_levels.size() ? model.R : model.z_levels[l + 1]; };
  return kernel_range_on_rect(model.z_levels[i], upper(i), model.z_levels[j], upper(j), sigma).inf;
}

namespace {

// Weights of G_n[w_min, R) conditioned on every level holding at least n_i
// vertices. Level counts are a multinomial conditioned on the lower bounds:
// independent Poisson counts truncated below n_i, with the rest bin [R, inf)
// accepted by its Poisson likelihood so the total is exactly n.
std::vector<double> conditioned_weights(const ModelParams& params, std::size_t n, const DeltaIrgModel& model,
                                        Stream rng) {
  const WeightDist dist(params);
  const double nd = static_cast<double>(n);
  const double rest_lambda = nd * dist.tail(model.R);
  const double rest_mode = std::floor(rest_lambda);
  const double log_rest_max = log_poisson_pmf(rest_lambda, rest_mode);
  std::vector<std::size_t> counts(model.counts.size());
  bool accepted = false;
  for (std::size_t attempt = 0; attempt < kConditionedTries && !accepted; ++attempt) {
    std::size_t total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      counts[i] = truncated_poisson(nd * model.level_mass[i], model.counts[i], rng);
      total += counts[i];
    }
    if (total > n) continue;
    const double rest = static_cast<double>(n - total);
    const double log_accept = log_poisson_pmf(rest_lambda, rest) - log_rest_max;
    accepted = std::log(rng.uniform_pos()) <= log_accept;
  }
  if (!accepted) throw CouplingUnavailable("could not sample level counts meeting the lower bounds");
  std::vector<double> weights;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double hi = i + 1 == counts.size() ? model.R : model.z_levels[i + 1];
    for (std::size_t c = 0; c < counts[i]; ++c)
      weights.push_back(dist.quantile_between(rng.uniform_pos(), model.z_levels[i], hi));
  }
  return weights;
}

}  // namespace

CoupledGraphs generate_coupled(const ModelParams& params, std::size_t n, const DeltaIrgModel& model,
                               std::uint64_t seed, const CouplingOptions& options) {
  if (n != model.n) throw std::invalid_argument("model was built for a different n");
  if (params.w_min() != model.w_min) throw std::invalid_argument("model was built for a different w_min");
  CoupledGraphs out{Graph{params, n, {}, {}, seed}, Graph{params, n, {}, {}, seed}, {}, {}, false};
  if (options.weights == CouplingWeights::iid) {
    GenerateOptions g;
    g.weight_window = WeightWindow{params.w_min(), model.R};
    g.path = options.path;
    g.threads = options.threads;
    out.full = generate(params, n, seed, g);
  } else {
    out.full = generate_on_weights(params, conditioned_weights(params, n, model, weight_stream(seed)), n, seed,
                                   options.path, options.threads);
  }

  const auto& w = out.full.weights;
  const std::size_t levels = model.z_levels.size();
  out.level_population.assign(levels, 0);
  std::vector<std::size_t> level(w.size());
  for (std::size_t v = 0; v < w.size(); ++v) {
    level[v] = model.level_of(w[v]);
    ++out.level_population[level[v]];
  }
  out.regular = true;
  for (std::size_t i = 0; i < levels; ++i) {
    const double expect = static_cast<double>(n) * model.level_mass[i];
    if (std::abs(static_cast<double>(out.level_population[i]) - expect) > model.delta * expect) out.regular = false;
    if (out.level_population[i] < model.counts[i])
      throw CouplingUnavailable("level " + std::to_string(i) + " holds fewer than n_i vertices");
  }

  // first n_i vertices of each level, by index
  std::vector<std::size_t> taken(levels, 0);
  std::vector<std::uint32_t> full_to_approx(w.size(), std::numeric_limits<std::uint32_t>::max());
  for (std::size_t v = 0; v < w.size(); ++v) {
    if (taken[level[v]] == model.counts[level[v]]) continue;
    ++taken[level[v]];
    full_to_approx[v] = static_cast<std::uint32_t>(out.approx_to_full.size());
    out.approx_to_full.push_back(static_cast<std::uint32_t>(v));
    out.approx.weights.push_back(model.z_levels[level[v]]);
  }

  const std::uint64_t key = coupling_stream(seed).key();
  const double sigma = params.sigma();
  for (const auto& e : out.full.edges) {
    const auto a = full_to_approx[e.u];
    const auto b = full_to_approx[e.v];
    if (a == std::numeric_limits<std::uint32_t>::max() || b == std::numeric_limits<std::uint32_t>::max()) continue;
    const double p = edge_probability(w[e.u], w[e.v], params, n);
    const double p_delta = params.q() * std::min(kernel_delta(w[e.u], w[e.v], model, sigma) / static_cast<double>(n), 1.0);
    if (to_unit_closed_open(bits_at(key, pair_index(e.u, e.v))) < p_delta / p)
      out.approx.edges.push_back({std::min(a, b), std::max(a, b)});
  }
  std::sort(out.approx.edges.begin(), out.approx.edges.end());
  return out;
}

bool approx_is_subgraph(const CoupledGraphs& c) {
  for (const auto& e : c.approx.edges) {
    if (e.u >= c.approx_to_full.size() || e.v >= c.approx_to_full.size()) return false;
    const std::uint32_t a = c.approx_to_full[e.u];
    const std::uint32_t b = c.approx_to_full[e.v];
    if (!std::binary_search(c.full.edges.begin(), c.full.edges.end(), Edge{std::min(a, b), std::max(a, b)}))
      return false;
  }
  return true;
}

std::size_t edge_difference(const CoupledGraphs& c) {
  std::vector<Edge> mapped;
  mapped.reserve(c.approx.edges.size());
  for (const auto& e : c.approx.edges) {
    const std::uint32_t a = c.approx_to_full[e.u];
    const std::uint32_t b = c.approx_to_full[e.v];
    mapped.push_back({std::min(a, b), std::max(a, b)});
  }
  std::sort(mapped.begin(), mapped.end());
  std::vector<Edge> diff;
  std::set_difference(c.full.edges.begin(), c.full.edges.end(), mapped.begin(), mapped.end(), std::back_inserter(diff));
  return diff.size();
}

}  // namespace irgld
