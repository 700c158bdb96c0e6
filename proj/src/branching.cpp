#include "irgld/branching.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "irgld/parallel.hpp"
#include "irgld/quadrature.hpp"

namespace irgld {

namespace {

constexpr double kWilsonZ = 1.959963984540054;
constexpr double kPoissonInversionMax = 30.0;

// Offspring mean m(w) = E[kappa(w, W)] with the constants of the closed form
// hoisted out of the exploration loop. Agrees with mean_kernel.
class OffspringMean {
 public:
  explicit OffspringMean(const ModelParams& p)
      : alpha_(p.alpha()), sigma_(p.sigma()), w_min_(p.w_min()), beta_(p.sigma() - p.alpha()) {
    const double aL = alpha_ * std::pow(w_min_, alpha_);
    upper_coef_ = aL / (alpha_ - 1.0);
    lower_coef_ = aL * std::pow(w_min_, beta_);
    log_w_min_ = std::log(w_min_);
  }

  MeanKernel operator()(double w) const noexcept {
    const double lr = std::log(w / w_min_);
    const double upper = upper_coef_ * std::exp((sigma_ + 1.0 - alpha_) * (lr + log_w_min_));
    double lower = 0.0;
    if (lr > 0.0) lower = w * lower_coef_ * integral(beta_ * lr, lr);
    return {upper, lower};
  }

 private:
  // int_0^lr exp(beta t) dt given x = beta * lr
  double integral(double x, double lr) const noexcept {
    if (std::abs(x) < 1e-12) return lr;
    return (std::abs(x) < 0.5 ? std::expm1(x) : std::exp(x) - 1.0) / beta_;
  }

  double alpha_, sigma_, w_min_, beta_;
  double upper_coef_ = 0.0, lower_coef_ = 0.0, log_w_min_ = 0.0;
};

// Poisson(mean) by sequential inversion of one uniform for small means.
std::uint64_t sample_poisson(double mean, Stream& s) {
  if (mean <= 0.0) return 0;
  if (mean >= kPoissonInversionMax) return std::poisson_distribution<std::uint64_t>(mean)(s);
  const double u = s.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  while (u >= cdf && p > 0.0) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

struct Pending {
  std::uint64_t key;
  double parent_weight;
  double parent_upper;
  double parent_lower;
  std::uint32_t depth;
};

}  // namespace

ProgenySample sample_progeny(const ModelParams& params, std::uint32_t size_cap, Stream rng,
                             std::uint32_t weight_store_cap) {
  if (size_cap < 1) throw std::invalid_argument("size_cap must be >= 1");
  const WeightDist dist(params);
  const OffspringMean offspring_mean(params);
  const double q = params.q();
  ProgenySample out;
  thread_local std::vector<double> weights;
  thread_local std::vector<Pending> queue;
  weights.clear();
  queue.clear();
  std::size_t head = 0;
  std::uint64_t discovered = 1;

  // Draws the potential offspring of a particle and queues the kept ones;
  // their types are drawn when they are explored. Returns false once the
  // population exceeds the cap.
  auto spawn = [&](Stream& s, double w, std::uint32_t depth) {
    const MeanKernel m = offspring_mean(w);
    const double mean = m.total();
    if (!std::isfinite(mean)) throw std::logic_error("offspring mean is not finite");
    const std::uint64_t k = sample_poisson(mean, s);
    for (std::uint64_t j = 0; j < k; ++j) {
      Stream child = s.split(j);
      if (child.uniform() >= q) continue;
      queue.push_back({child.key(), w, m.upper, m.lower, depth + 1});
      out.generations = std::max(out.generations, depth + 1);
      if (++discovered > size_cap) return false;
    }
    return true;
  };

  Stream root = rng.split(0);
  const double w0 = dist.quantile(root.uniform_pos());
  weights.push_back(w0);
  bool alive = spawn(root, w0, 0);
  while (alive && head < queue.size()) {
    const Pending p = queue[head++];
    // position 0 of a child stream is its mark
    Stream s = Stream::from_key(p.key, 1);
    const double u_part = s.uniform();
    const double u_value = s.uniform_pos();
    const double w =
        sample_child_weight(p.parent_weight, {p.parent_upper, p.parent_lower}, params, u_part, u_value);
    weights.push_back(w);
    alive = spawn(s, w, p.depth);
  }
  out.censored = !alive;
  out.size = static_cast<std::uint32_t>(std::min<std::uint64_t>(discovered, size_cap + 1ULL));
  if (!out.censored && out.size <= weight_store_cap) out.weights.assign(weights.begin(), weights.end());
  return out;
}

TreePool::TreePool(ModelParams params, std::uint32_t size_cap, std::uint32_t weight_store_cap, std::uint64_t seed)
    : params_(params), size_cap_(size_cap), weight_store_cap_(weight_store_cap), seed_(seed) {
  if (size_cap < 1) throw std::invalid_argument("size_cap must be >= 1");
}

TreePool TreePool::from_samples(const ModelParams& params, std::span<const ProgenySample> samples,
                                std::uint32_t size_cap, std::uint64_t seed) {
  TreePool pool(params, size_cap, size_cap, seed);
  for (const auto& s : samples) pool.push_back(s);
  return pool;
}

void TreePool::push_back(const ProgenySample& s) {
  if (s.size < 1) throw std::invalid_argument("progeny size must be >= 1");
  if (!s.weights.empty() && s.weights.size() != s.size)
    throw std::invalid_argument("stored weights must match the progeny size");
  sizes_.push_back(s.size);
  censored_.push_back(s.censored ? 1 : 0);
  generations_.push_back(s.generations);
  const double sigma = params_.sigma();
  if (!s.censored && !s.weights.empty()) {
    for (double w : s.weights) {
      weights_.push_back(w);
      weight_pows_.push_back(sigma == 1.0 ? w : std::pow(w, sigma));
    }
  }
  offsets_.push_back(weights_.size());
  if (s.censored) {
    ++censored_count_;
  } else {
    ++histogram_[s.size];
    if (s.weights.empty()) ++unstored_;
  }
}

ProgenySample TreePool::sample(std::size_t i) const {
  ProgenySample s;
  s.size = sizes_.at(i);
  s.censored = censored_[i] != 0;
  s.generations = generations_[i];
  auto w = weights(i);
  s.weights.assign(w.begin(), w.end());
  return s;
}

bool TreePool::operator==(const TreePool& o) const {
  return params_ == o.params_ && size_cap_ == o.size_cap_ && weight_store_cap_ == o.weight_store_cap_ &&
         seed_ == o.seed_ && sizes_ == o.sizes_ && censored_ == o.censored_ && generations_ == o.generations_ &&
         offsets_ == o.offsets_ && weights_ == o.weights_;
}

TreePool build_pool(const ModelParams& params, std::size_t M, std::uint32_t size_cap, std::uint64_t seed,
                    const PoolOptions& options) {
  if (M < 1) throw std::invalid_argument("pool size M must be >= 1");
  const std::uint32_t store = options.weight_store_cap == 0 ? size_cap : options.weight_store_cap;
  constexpr std::size_t chunks = 256;
  std::vector<std::vector<ProgenySample>> parts(std::min(chunks, M));
  const Stream base(seed);
  parallel_chunks(M, parts.size(), options.threads, [&](std::size_t c, std::size_t b, std::size_t e) {
    parts[c].reserve(e - b);
    for (std::size_t i = b; i < e; ++i) parts[c].push_back(sample_progeny(params, size_cap, base.split(i), store));
  });
  TreePool pool(params, size_cap, store, seed);
  for (auto& part : parts) {
    for (const auto& s : part) pool.push_back(s);
    part.clear();
    part.shrink_to_fit();
  }
  return pool;
}

ThetaEstimate estimate_theta(const TreePool& pool) {
  if (pool.empty()) throw std::invalid_argument("empty pool");
  const double m = static_cast<double>(pool.count());
  const double p = static_cast<double>(pool.censored_count()) / m;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / m;
  const double center = (p + z2 / (2.0 * m)) / denom;
  const double half = kWilsonZ * std::sqrt(p * (1.0 - p) / m + z2 / (4.0 * m * m)) / denom;
  std::size_t above_half = pool.censored_count();
  for (auto [size, count] : pool.size_histogram())
    if (2ULL * size > pool.size_cap()) above_half += count;
  const double lo = pool.censored_count() == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = pool.censored_count() == pool.count() ? 1.0 : std::min(1.0, center + half);
  return {p,
          {lo, hi},
          std::sqrt(p * (1.0 - p) / m),
          {p, static_cast<double>(above_half) / m}};
}

double theta_rank_one_oracle(const ModelParams& params) {
  if (params.sigma() != 1.0) throw std::invalid_argument("rank-one oracle is unsupported for sigma != 1");
  const WeightDist dist(params);
  const double q = params.q();
  double c = dist.mean();
  for (int iter = 0; iter < 200000; ++iter) {
    const double next = expect_weight(dist, [&](double w) { return -w * std::expm1(-q * c * w); });
    if (next < 1e-12) return 0.0;
    const bool done = std::abs(next - c) <= 1e-14 * c;
    c = next;
    if (done) break;
  }
  return -expect_weight(dist, [&](double w) { return std::expm1(-q * c * w); });
}

double estimate_H(const TreePool& pool, double z) {
  if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("z must lie in [0, 1]");
  if (pool.empty()) throw std::invalid_argument("empty pool");
  double total = 0.0;
  for (std::size_t i = 0; i < pool.count(); ++i)
    if (!pool.censored(i)) total += std::pow(z, static_cast<double>(pool.size(i)));
  return total / static_cast<double>(pool.count());
}

BiasedValue estimate_phi(const TreePool& pool, double h_prime) {
  if (!(h_prime >= 0.0)) throw std::domain_error("h' must be non-negative");
  if (pool.empty()) throw std::invalid_argument("empty pool");
  const double base = 1.0 - pool.params().q();
  double total = 0.0;
  for (auto [size, count] : pool.size_histogram())
    total += static_cast<double>(count) * std::pow(base, static_cast<double>(size) * h_prime);
  const double m = static_cast<double>(pool.count());
  const double censored = static_cast<double>(pool.censored_count()) / m;
  return {total / m, censored * std::pow(base, static_cast<double>(pool.size_cap()) * h_prime)};
}

double size_probability(const TreePool& pool, std::size_t ell) {
  if (pool.empty()) throw std::invalid_argument("empty pool");
  auto it = pool.size_histogram().find(static_cast<std::uint32_t>(ell));
  const double c = it == pool.size_histogram().end() ? 0.0 : static_cast<double>(it->second);
  return c / static_cast<double>(pool.count());
}

std::map<ComponentType, double> type_distribution(const TreePool& pool, double eps, double R,
                                                  std::size_t ell_max) {
  if (pool.empty()) throw std::invalid_argument("empty pool");
  std::map<ComponentType, std::size_t> counts;
  for (std::size_t i = 0; i < pool.count(); ++i) {
    if (pool.censored(i) || pool.size(i) > ell_max || !pool.has_weights(i)) continue;
    if (auto t = classify_component(pool.weights(i), eps, R, pool.params().w_min())) ++counts[*t];
  }
  std::map<ComponentType, double> out;
  const double m = static_cast<double>(pool.count());
  for (const auto& [t, c] : counts) out.emplace(t, static_cast<double>(c) / m);
  return out;
}

double estimate_type_prob(const TreePool& pool, const ComponentType& type) {
  if (pool.empty()) throw std::invalid_argument("empty pool");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pool.count(); ++i) {
    if (pool.censored(i) || pool.size(i) != type.ell || !pool.has_weights(i)) continue;
    auto t = classify_component(pool.weights(i), type.eps, type.R, pool.params().w_min());
    if (t && *t == type) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pool.count());
}

double pbar_pow(std::span<const double> x_pow, std::span<const double> y, double q) {
  double prod = 1.0;
  for (double xp : x_pow) {
    for (double yi : y) prod *= 1.0 - q * std::min(xp * yi, 1.0);
    if (prod == 0.0) break;
  }
  return prod;
}

double pbar(std::span<const double> x, std::span<const double> y, double q, double sigma) {
  for (double v : x)
    if (!(v > 0.0)) throw std::domain_error("pbar requires positive x");
  for (double v : y)
    if (v < 0.0) throw std::domain_error("pbar requires non-negative y");
  std::vector<double> xp(x.size());
  std::transform(x.begin(), x.end(), xp.begin(), [&](double v) { return std::pow(v, sigma); });
  return pbar_pow(xp, y, q);
}

double estimate_g_ell(const TreePool& pool, std::span<const double> y, std::size_t ell) {
  if (pool.empty()) throw std::invalid_argument("empty pool");
  if (ell < 1) throw std::invalid_argument("ell must be >= 1");
  const double q = pool.params().q();
  double total = 0.0;
  for (std::size_t i = 0; i < pool.count(); ++i)
    if (!pool.censored(i) && pool.size(i) == ell && pool.has_weights(i)) total += pbar_pow(pool.weight_pows(i), y, q);
  return total / static_cast<double>(pool.count()) / static_cast<double>(ell);
}

BiasedValue estimate_no_connection(const TreePool& pool, std::span<const double> y) {
  if (pool.empty()) throw std::invalid_argument("empty pool");
  const auto& p = pool.params();
  const double q = p.q();
  double total = 0.0;
  for (std::size_t i = 0; i < pool.count(); ++i)
    if (!pool.censored(i) && pool.has_weights(i)) total += pbar_pow(pool.weight_pows(i), y, q);
  // per-particle factor bound; only valid when w_min^sigma is the smallest x^sigma
  double factor = 1.0;
  if (p.sigma() >= 0.0) {
    const double wp = std::pow(p.w_min(), p.sigma());
    for (double yi : y) factor *= 1.0 - q * std::min(wp * yi, 1.0);
  }
  const double m = static_cast<double>(pool.count());
  const double bias = static_cast<double>(pool.censored_count()) / m *
                          std::pow(factor, static_cast<double>(pool.size_cap())) +
                      static_cast<double>(pool.unstored_count()) / m;
  return {total / m, bias};
}

}  // namespace irgld
