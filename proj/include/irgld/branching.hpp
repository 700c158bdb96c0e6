#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "irgld/graph.hpp"
#include "irgld/model.hpp"
#include "irgld/rng.hpp"

namespace irgld {

struct ProgenySample {
  std::uint32_t size = 1;  // total progeny, or the population reached when censored
  bool censored = false;
  std::uint32_t generations = 0;
  std::vector<double> weights;  // root first; empty unless stored
};

// Explores the tree until it dies out or its population exceeds size_cap.
// Potential children are drawn at q = 1 and child j of a particle is kept iff
// its mark (first uniform of the child stream) is below q, so samples drawn
// from the same stream are nested in q.
ProgenySample sample_progeny(const ModelParams& params, std::uint32_t size_cap, Stream rng,
                             std::uint32_t weight_store_cap);
inline ProgenySample sample_progeny(const ModelParams& params, std::uint32_t size_cap, Stream rng) {
  return sample_progeny(params, size_cap, rng, size_cap);
}

struct PoolOptions {
  std::uint32_t weight_store_cap = 0;  // 0: same as size_cap
  unsigned threads = 1;
};

// Immutable pool of iid progeny samples stored as flat arrays.
class TreePool {
 public:
  TreePool(ModelParams params, std::uint32_t size_cap, std::uint32_t weight_store_cap, std::uint64_t seed);

  static TreePool from_samples(const ModelParams& params, std::span<const ProgenySample> samples,
                               std::uint32_t size_cap, std::uint64_t seed = 0);

  void push_back(const ProgenySample& s);

  const ModelParams& params() const noexcept { return params_; }
  std::uint32_t size_cap() const noexcept { return size_cap_; }
  std::uint32_t weight_store_cap() const noexcept { return weight_store_cap_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t count() const noexcept { return sizes_.size(); }
  bool empty() const noexcept { return sizes_.empty(); }

  std::uint32_t size(std::size_t i) const { return sizes_[i]; }
  bool censored(std::size_t i) const { return censored_[i] != 0; }
  std::uint32_t generations(std::size_t i) const { return generations_[i]; }
  bool has_weights(std::size_t i) const { return offsets_[i + 1] > offsets_[i]; }
  std::span<const double> weights(std::size_t i) const {
    return {weights_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  // w^sigma for every stored weight, aligned with weights(i)
  std::span<const double> weight_pows(std::size_t i) const {
    return {weight_pows_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  std::size_t censored_count() const noexcept { return censored_count_; }
  // uncensored size -> number of trees
  const std::map<std::uint32_t, std::size_t>& size_histogram() const noexcept { return histogram_; }
  // uncensored trees whose weights were not stored
  std::size_t unstored_count() const noexcept { return unstored_; }

  ProgenySample sample(std::size_t i) const;

  bool operator==(const TreePool& o) const;

 private:
  ModelParams params_;
  std::uint32_t size_cap_;
  std::uint32_t weight_store_cap_;
  std::uint64_t seed_;
  std::vector<std::uint32_t> sizes_;
  std::vector<std::uint8_t> censored_;
  std::vector<std::uint32_t> generations_;
  std::vector<std::size_t> offsets_{0};
  std::vector<double> weights_;
  std::vector<double> weight_pows_;
  std::map<std::uint32_t, std::size_t> histogram_;
  std::size_t censored_count_ = 0;
  std::size_t unstored_ = 0;
};

// Tree i is drawn from Stream(seed).split(i), so the pool is independent of
// the thread count and pools for different q with one seed are nested.
TreePool build_pool(const ModelParams& params, std::size_t M, std::uint32_t size_cap, std::uint64_t seed,
                    const PoolOptions& options = {});

void write_pool(const TreePool& pool, std::ostream& os);
TreePool read_pool(std::istream& is);
void save_pool(const TreePool& pool, const std::string& path);
TreePool load_pool(const std::string& path);

// ---------------------------------------------------------------------------
// Estimators on a fixed pool

struct Interval {
  double lo;
  double hi;
};

struct ThetaEstimate {
  double theta;        // censored fraction
  Interval ci;         // Wilson 95%
  double se;           // binomial standard error
  Interval cap_bracket;  // [P(censored), P(size > cap/2)]
};

ThetaEstimate estimate_theta(const TreePool& pool);

// Survival probability of the rank-one (sigma = 1) process from the fixed
// point c = E[W (1 - exp(-q c W))], theta = 1 - E[exp(-q c W)].
double theta_rank_one_oracle(const ModelParams& params);

struct BiasedValue {
  double value;
  double bias_bound;
};

// mean of z^size over uncensored trees (censored trees count 0)
double estimate_H(const TreePool& pool, double z);
// mean of (1-q)^(size h') over uncensored trees
BiasedValue estimate_phi(const TreePool& pool, double h_prime);

// P(|T| = ell)
double size_probability(const TreePool& pool, std::size_t ell);

// Type probabilities of uncensored trees of size <= ell_max with all weights below R.
std::map<ComponentType, double> type_distribution(const TreePool& pool, double eps, double R, std::size_t ell_max);
double estimate_type_prob(const TreePool& pool, const ComponentType& type);

double pbar(std::span<const double> x, std::span<const double> y, double q, double sigma);
// Same product from precomputed x^sigma.
double pbar_pow(std::span<const double> x_pow, std::span<const double> y, double q);

double estimate_g_ell(const TreePool& pool, std::span<const double> y, std::size_t ell);
BiasedValue estimate_no_connection(const TreePool& pool, std::span<const double> y);

}  // namespace irgld
