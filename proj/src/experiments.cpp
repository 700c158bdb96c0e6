#include "irgld/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "irgld/parallel.hpp"

namespace irgld {

void ExperimentConfig::validate() const {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0, 1)");
  if (!(margin > 0.0 && margin < 1.0)) throw std::invalid_argument("margin must lie in (0, 1)");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(R > params.w_min())) throw std::invalid_argument("R must exceed w_min");
  if (ell_max < 1) throw std::invalid_argument("ell_max must be >= 1");
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"params", to_json(c.params)}, {"n", c.n},       {"replications", c.replications},
          {"rho", c.rho},                {"margin", c.margin}, {"seed", c.seed},
          {"eps", c.eps},                {"R", c.R},       {"ell_max", c.ell_max},
          {"path", to_string(c.path)}};
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t r) {
  return derive_key(mix64(master ^ 0x5EEDULL), r);
}

nlohmann::json to_json(const Replication& r) {
  nlohmann::json dens = nlohmann::json::object();
  for (auto [ell, d] : r.component_density) dens[std::to_string(ell)] = d;
  return {{"seed", r.seed},       {"vertices", r.vertices}, {"giant_fraction", r.giant_fraction},
          {"N_ell_over_n", dens}, {"hubs", r.hubs},         {"success", r.success}};
}

void RunRecord::finalize() {
  giant_sorted.clear();
  std::size_t wins = 0;
  for (const auto& r : replications) {
    giant_sorted.push_back(r.giant_fraction);
    wins += r.success ? 1 : 0;
  }
  std::sort(giant_sorted.begin(), giant_sorted.end());
  success_fraction = replications.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(replications.size());
}

double RunRecord::mean_giant() const {
  if (replications.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : replications) s += r.giant_fraction;
  return s / static_cast<double>(replications.size());
}

nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& x : r.replications) reps.push_back(to_json(x));
  return {{"replications", reps}, {"success_fraction", r.success_fraction}, {"giant_sorted", r.giant_sorted}};
}

namespace {

Replication observe(const Graph& g, const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto stats = components(g);
  Replication r;
  r.seed = seed;
  r.vertices = g.vertex_count();
  const double n = static_cast<double>(cfg.n);
  r.giant_fraction = static_cast<double>(stats.largest_size) / n;
  for (std::size_t ell = 1; ell <= cfg.ell_max; ++ell) {
    auto it = stats.count_by_size.find(ell);
    r.component_density[ell] = it == stats.count_by_size.end() ? 0.0 : static_cast<double>(it->second) / n;
  }
  r.success = static_cast<double>(stats.largest_size) > cfg.rho * n;
  return r;
}

// Replications run concurrently, one graph per worker.
template <class Fn>
RunRecord replicate(const ExperimentConfig& cfg, Fn&& one) {
  RunRecord rec;
  rec.replications.resize(cfg.replications);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    rec.replications[r] = one(r, replication_seed(cfg.seed, r));
  });
  rec.finalize();
  return rec;
}

GenerateOptions base_options(const ExperimentConfig& cfg) {
  GenerateOptions o;
  o.path = cfg.path;
  return o;
}

// sup |F_a - F_b| for two samples
double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return 1.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() || j < b.size()) {
    double x;
    if (j == b.size() || (i < a.size() && a[i] <= b[j])) x = a[i];
    else x = b[j];
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace

LlnReport run_lln(const ExperimentConfig& cfg, const TreePool& pool) {
  cfg.validate();
  LlnReport rep;
  rep.record = replicate(cfg, [&](std::size_t, std::uint64_t seed) {
    return observe(generate(cfg.params, cfg.n, seed, base_options(cfg)), cfg, seed);
  });
  rep.theta_hat = estimate_theta(pool).theta;
  if (cfg.params.sigma() == 1.0) rep.theta_oracle = theta_rank_one_oracle(cfg.params);
  for (std::size_t ell = 1; ell <= cfg.ell_max; ++ell) rep.size_probability[ell] = size_probability(pool, ell);
  const double target = rep.theta_oracle.value_or(rep.theta_hat);
  double err = 0.0;
  for (const auto& r : rep.record.replications) err += std::abs(r.giant_fraction - target);
  rep.mean_abs_error = err / static_cast<double>(cfg.replications);
  return rep;
}

RunRecord run_planted_hubs(const ExperimentConfig& cfg, const TreePool& pool, const PlantSpec& spec) {
  cfg.validate();
  const double nd = static_cast<double>(cfg.n);
  double phi = 0.0;
  std::size_t sample_h = spec.sample_h;
  if (spec.mode == HubMode::sample_in_y) {
    const double target = cfg.rho + cfg.margin;
    const std::size_t needed = hubs(target, pool).ceil;
    if (sample_h == 0) sample_h = needed;
    if (sample_h == 0) throw std::invalid_argument("rho + margin lies below theta: no hubs to sample");
    if (spec.h > sample_h) throw std::invalid_argument("cannot keep more hubs than sampled");
    // beyond ceil(hubs) no coordinate is forced above a threshold; reuse the
    // one for ceil(hubs) hubs as the lower end of the proposal
    const auto t = phi_threshold(target, std::min(sample_h, std::max<std::size_t>(needed, 1)), pool);
    if (!t.found) throw std::runtime_error("no admissible phi threshold; increase the pool size");
    phi = t.phi;
  }
  if (spec.mode == HubMode::explicit_list && spec.y.size() != spec.h)
    throw std::invalid_argument("explicit hub list must have h entries");

  return replicate(cfg, [&](std::size_t, std::uint64_t seed) {
    std::vector<double> y;
    if (spec.mode == HubMode::explicit_list) {
      y = spec.y;
    } else if (spec.mode == HubMode::sample_in_y) {
      Stream rng = Stream(seed).split(3);
      y = sample_member(cfg.rho + cfg.margin, pool, phi, sample_h, rng);
      y.resize(spec.h);
      for (auto& v : y) v *= spec.scale;
    }
    GenerateOptions o = base_options(cfg);
    for (double v : y) o.planted_weights.push_back(v * nd);
    if (!y.empty()) {
      const double cut = (phi > 0.0 ? phi : *std::min_element(y.begin(), y.end())) * nd;
      if (cut > cfg.params.w_min()) o.hub_cutoff = cut;
    }
    Replication r = observe(generate(cfg.params, cfg.n, seed, o), cfg, seed);
    r.hubs = y;
    return r;
  });
}

ConditionalReport run_conditional(const ExperimentConfig& cfg, const TreePool& pool, std::size_t draws) {
  cfg.validate();
  ConditionalReport rep;
  rep.h = hubs(cfg.rho, pool).ceil;
  if (rep.h == 0) throw std::invalid_argument("conditional experiment requires ceil(hubs) >= 1");
  const auto t = phi_threshold(cfg.rho, rep.h, pool);
  if (!t.found) throw std::runtime_error("no admissible phi threshold; increase the pool size");
  rep.phi = t.phi;
  const double nd = static_cast<double>(cfg.n);

  rep.record = replicate(cfg, [&](std::size_t, std::uint64_t seed) {
    Stream rng = Stream(seed).split(3);
    auto y = sample_member(cfg.rho, pool, rep.phi, rep.h, rng);
    GenerateOptions o = base_options(cfg);
    for (double v : y) o.planted_weights.push_back(v * nd);
    if (rep.phi * nd > cfg.params.w_min()) o.hub_cutoff = rep.phi * nd;
    Replication r = observe(generate(cfg.params, cfg.n, seed, o), cfg, seed);
    r.hubs = y;
    return r;
  });

  for (const auto& r : rep.record.replications) {
    std::map<std::size_t, double> g;
    double worst = 0.0;
    for (std::size_t ell = 1; ell <= cfg.ell_max; ++ell) {
      g[ell] = estimate_g_ell(pool, r.hubs, ell);
      worst = std::max(worst, std::abs(r.component_density.at(ell) - g[ell]));
    }
    rep.g_ell.push_back(std::move(g));
    rep.max_density_error.push_back(worst);
  }

  const auto c = estimate_C(cfg.rho, pool, rep.phi, rep.h, draws, mix64(cfg.seed ^ 0xC0FFEEULL), cfg.threads);
  rep.ks_distance = ks_two_sample(rep.record.giant_sorted, c.member_levels);
  const double hi = std::max(c.member_levels.empty() ? cfg.rho
                                                     : *std::max_element(c.member_levels.begin(), c.member_levels.end()),
                             rep.record.giant_sorted.empty() ? cfg.rho : rep.record.giant_sorted.back());
  constexpr std::size_t points = 41;
  for (std::size_t i = 0; i < points; ++i)
    rep.s_grid.push_back(cfg.rho + (hi - cfg.rho) * static_cast<double>(i) / (points - 1));
  rep.c_ratio = c_ratio_curve(c, rep.s_grid);
  const auto& gs = rep.record.giant_sorted;
  for (double s : rep.s_grid) {
    const auto above = gs.end() - std::upper_bound(gs.begin(), gs.end(), s);
    rep.empirical_survival.push_back(static_cast<double>(above) / static_cast<double>(gs.size()));
  }
  std::size_t supported = 0;
  for (double g : gs) supported += g >= cfg.rho - 0.02 ? 1 : 0;
  rep.support_fraction = static_cast<double>(supported) / static_cast<double>(gs.size());
  return rep;
}

double type_sum(const TypeCounts& counts, const std::map<ComponentType, double>& reference, std::size_t n) {
  const double nd = static_cast<double>(n);
  double total = 0.0;
  for (const auto& [t, p] : reference) {
    auto it = counts.find(t);
    const double observed = it == counts.end() ? 0.0 : static_cast<double>(t.ell * it->second) / nd;
    total += std::abs(observed - p);
  }
  for (const auto& [t, c] : counts)
    if (!reference.count(t)) total += static_cast<double>(t.ell * c) / nd;
  return total;
}

CouplingReport run_coupling_check(const ExperimentConfig& cfg, double delta, CouplingWeights weights,
                                  const std::map<ComponentType, double>* types) {
  cfg.validate();
  const DeltaIrgModel model = build_delta_irg(cfg.params, cfg.n, delta, cfg.R);
  if (types) {
    const double ratio = cfg.eps / delta;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) throw std::invalid_argument("eps / delta must be an integer");
  }
  struct One {
    bool available = false;
    bool subgraph = true;
    bool regular = false;
    double edge_diff = 0.0;
    double giant_diff = 0.0;
    double ts_full = 0.0;
    double ts_approx = 0.0;
  };
  std::vector<One> runs(cfg.replications);
  constexpr std::size_t retries = 10;
  const double nd = static_cast<double>(cfg.n);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    const std::uint64_t base = replication_seed(cfg.seed, r);
    for (std::size_t attempt = 0; attempt < retries; ++attempt) {
      const std::uint64_t seed = attempt == 0 ? base : derive_key(base, attempt);
      std::optional<CoupledGraphs> coupled;
      try {
        coupled.emplace(generate_coupled(cfg.params, cfg.n, model, seed, {weights, cfg.path, 1}));
      } catch (const CouplingUnavailable&) {
        continue;
      }
      const CoupledGraphs& c = *coupled;
      One& o = runs[r];
      o.available = true;
      o.subgraph = approx_is_subgraph(c);
      o.regular = c.regular;
      o.edge_diff = static_cast<double>(edge_difference(c)) / nd;
      const double gf = static_cast<double>(components(c.full).largest_size);
      const double ga = static_cast<double>(components(c.approx).largest_size);
      o.giant_diff = std::abs(gf - ga) / nd;
      if (types) {
        o.ts_full = type_sum(count_types(c.full, cfg.eps, cfg.R, cfg.ell_max), *types, cfg.n);
        o.ts_approx = type_sum(count_types(c.approx, cfg.eps, cfg.R, cfg.ell_max), *types, cfg.n);
      }
      return;
    }
  });
  CouplingReport rep;
  rep.delta = delta;
  std::size_t ok = 0;
  for (const auto& o : runs) {
    ++rep.runs;
    if (!o.available) {
      ++rep.unavailable;
      continue;
    }
    ++ok;
    rep.violations += o.subgraph ? 0 : 1;
    rep.regular += o.regular ? 1 : 0;
    rep.mean_edge_difference += o.edge_diff;
    rep.mean_giant_difference += o.giant_diff;
    rep.max_giant_difference = std::max(rep.max_giant_difference, o.giant_diff);
    rep.giant_difference.push_back(o.giant_diff);
    rep.type_sum_full += o.ts_full;
    rep.type_sum_approx += o.ts_approx;
  }
  if (ok > 0) {
    const double k = static_cast<double>(ok);
    rep.mean_edge_difference /= k;
    rep.mean_giant_difference /= k;
    rep.type_sum_full /= k;
    rep.type_sum_approx /= k;
  }
  return rep;
}

ConcentrationReport run_concentration(const ExperimentConfig& cfg, const TreePool& pool, double tolerance) {
  cfg.validate();
  const auto reference = type_distribution(pool, cfg.eps, cfg.R, cfg.ell_max);
  ConcentrationReport rep;
  rep.tolerance = tolerance;
  rep.type_sums.resize(cfg.replications);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    const Graph g = generate(cfg.params, cfg.n, replication_seed(cfg.seed, r), base_options(cfg));
    rep.type_sums[r] = type_sum(count_types(g, cfg.eps, cfg.R, cfg.ell_max), reference, cfg.n);
  });
  for (double s : rep.type_sums) rep.within += s <= tolerance ? 1 : 0;
  return rep;
}

std::vector<double> exact_small_oracle(std::span<const double> weights, const ModelParams& params,
                                       std::size_t n_model) {
  const std::size_t n = weights.size();
  if (n > 6) throw std::invalid_argument("exact oracle refuses n > 6");
  std::vector<double> law(n + 1, 0.0);
  if (n == 0) {
    law[0] = 1.0;
    return law;
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::vector<double> p;
  for (std::uint32_t v = 1; v < n; ++v)
    for (std::uint32_t u = 0; u < v; ++u) {
      pairs.emplace_back(u, v);
      p.push_back(edge_probability(weights[u], weights[v], params, n_model));
    }
  const std::size_t m = pairs.size();
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    double prob = 1.0;
    std::array<std::uint32_t, 6> parent{};
    std::iota(parent.begin(), parent.begin() + static_cast<std::ptrdiff_t>(n), 0u);
    auto find = [&](std::uint32_t x) {
      while (parent[x] != x) x = parent[x];
      return x;
    };
    for (std::size_t e = 0; e < m; ++e) {
      if (mask >> e & 1u) {
        prob *= p[e];
        const auto a = find(pairs[e].first), b = find(pairs[e].second);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      } else {
        prob *= 1.0 - p[e];
      }
    }
    if (prob == 0.0) continue;
    std::array<std::size_t, 6> size{};
    for (std::uint32_t v = 0; v < n; ++v) ++size[find(v)];
    law[*std::max_element(size.begin(), size.end())] += prob;
  }
  return law;
}

std::vector<double> mc_largest_component_law(std::span<const double> weights, const ModelParams& params,
                                             std::size_t n_model, std::size_t runs, std::uint64_t seed0) {
  std::vector<double> law(weights.size() + 1, 0.0);
  const std::vector<double> w(weights.begin(), weights.end());
  for (std::size_t r = 0; r < runs; ++r) {
    const Graph g = generate_on_weights(params, w, n_model, seed0 + r);
    law[components(g).largest_size] += 1.0;
  }
  for (auto& x : law) x /= static_cast<double>(runs);
  return law;
}

double naive_tail_estimate(const ExperimentConfig& cfg, std::size_t h) {
  cfg.validate();
  const WeightDist dist(cfg.params);
  const double nd = static_cast<double>(cfg.n);
  const double scale = std::pow(nd * dist.tail(nd), static_cast<double>(h));
  if (scale < 1e-6)
    throw NaiveTailRefused("naive Monte Carlo of the upper tail refused: (n P(W > n))^h = " + std::to_string(scale) +
                           " < 1e-6; use the planted or conditional experiments");
  const RunRecord rec = replicate(cfg, [&](std::size_t, std::uint64_t seed) {
    return observe(generate(cfg.params, cfg.n, seed, base_options(cfg)), cfg, seed);
  });
  return rec.success_fraction;
}

void append_jsonl(const std::string& path, const nlohmann::json& record) {
  std::ofstream os(path, std::ios::app);
  if (!os) throw std::runtime_error("cannot open run store '" + path + "'");
  os << record.dump() << '\n';
  if (!os) throw std::runtime_error("write to run store '" + path + "' failed");
}

}  // namespace irgld
