#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "irgld/branching.hpp"
#include "irgld/graph.hpp"
#include "irgld/ldp.hpp"
#include "irgld/model.hpp"

namespace irgld {

struct ExperimentConfig {
  ModelParams params{3.5, 1.0, 1.0, 1.0};
  std::size_t n = 1000;
  std::size_t replications = 10;
  double rho = 0.5;
  double margin = 0.05;
  std::uint64_t seed = 1;
  double eps = 0.5;
  double R = 4.0;
  std::size_t ell_max = 5;
  GeneratorPath path = GeneratorPath::bucketed;
  unsigned threads = 1;
  // success-fraction thresholds used by the planted-hub proxies
  double sufficiency_threshold = 0.9;
  double necessity_threshold = 0.02;
  double too_few_threshold = 0.05;

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);

// Seed of replication r; the graph of a replication uses its own seed and
// hub sampling uses Stream(rep_seed).split(3).
std::uint64_t replication_seed(std::uint64_t master, std::size_t r);

struct Replication {
  std::uint64_t seed = 0;
  std::size_t vertices = 0;
  double giant_fraction = 0.0;
  std::map<std::size_t, double> component_density;  // l -> N_{n,l} / n, l <= ell_max
  std::vector<double> hubs;                         // rescaled hub weights y
  bool success = false;                             // |C1| > rho n
};

nlohmann::json to_json(const Replication& r);

struct RunRecord {
  std::vector<Replication> replications;
  double success_fraction = 0.0;
  std::vector<double> giant_sorted;  // empirical CDF support of |C1| / n

  void finalize();
  double mean_giant() const;
};

nlohmann::json to_json(const RunRecord& r);

// ---------------------------------------------------------------------------

struct LlnReport {
  RunRecord record;
  double theta_hat = 0.0;
  std::optional<double> theta_oracle;  // sigma = 1 only
  std::map<std::size_t, double> size_probability;  // P(|T| = l) from the pool; S_{n,l}/n targets
  double mean_abs_error = 0.0;           // against the oracle when present, else theta_hat
};

LlnReport run_lln(const ExperimentConfig& cfg, const TreePool& pool);

enum class HubMode { none, explicit_list, sample_in_y };

struct PlantSpec {
  HubMode mode = HubMode::none;
  std::size_t h = 0;
  std::vector<double> y;      // explicit_list
  // sample_in_y: y is sampled in Y_{rho + margin} with `sample_h` coordinates,
  // then the `h` largest are kept and multiplied by `scale`.
  std::size_t sample_h = 0;
  double scale = 1.0;
};

RunRecord run_planted_hubs(const ExperimentConfig& cfg, const TreePool& pool, const PlantSpec& spec);

struct ConditionalReport {
  RunRecord record;
  std::size_t h = 0;
  double phi = 0.0;
  // per replication, max over l <= ell_max of |N_{n,l}/n - g_l(y)|
  std::vector<double> max_density_error;
  std::vector<std::map<std::size_t, double>> g_ell;
  double ks_distance = 0.0;
  std::vector<double> s_grid;
  std::vector<double> empirical_survival;
  std::vector<double> c_ratio;
  double support_fraction = 0.0;  // fraction with |C1|/n >= rho - 0.02
};

ConditionalReport run_conditional(const ExperimentConfig& cfg, const TreePool& pool, std::size_t draws);

struct CouplingReport {
  double delta = 0.0;
  std::size_t runs = 0;
  std::size_t violations = 0;
  std::size_t unavailable = 0;
  std::size_t regular = 0;
  double mean_edge_difference = 0.0;  // |E_full \ E_approx| / n
  double mean_giant_difference = 0.0;
  double max_giant_difference = 0.0;
  std::vector<double> giant_difference;
  double type_sum_full = 0.0;
  double type_sum_approx = 0.0;
};

// Types are classified on cfg.eps / cfg.R against `types` (pool estimates).
CouplingReport run_coupling_check(const ExperimentConfig& cfg, double delta, CouplingWeights weights,
                                  const std::map<ComponentType, double>* types = nullptr);

// sum over l <= ell_max and types of |l N(type)/n - theta(type)|
double type_sum(const TypeCounts& counts, const std::map<ComponentType, double>& reference, std::size_t n);

struct ConcentrationReport {
  std::vector<double> type_sums;  // one per replication
  std::size_t within = 0;         // replications with sum <= tolerance
  double tolerance = 0.05;
};

ConcentrationReport run_concentration(const ExperimentConfig& cfg, const TreePool& pool, double tolerance = 0.05);

// Exact law of |C1|: index k holds P(|C1| = k). Refuses n > 6.
std::vector<double> exact_small_oracle(std::span<const double> weights, const ModelParams& params,
                                       std::size_t n_model);

// Monte Carlo estimate of the same law from generate_on_weights over seeds
// seed0, seed0+1, ...
std::vector<double> mc_largest_component_law(std::span<const double> weights, const ModelParams& params,
                                             std::size_t n_model, std::size_t runs, std::uint64_t seed0);

class NaiveTailRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Plain Monte Carlo of P(|C1| > rho n). Refused when (n P(W > n))^h < 1e-6.
double naive_tail_estimate(const ExperimentConfig& cfg, std::size_t h);

void append_jsonl(const std::string& path, const nlohmann::json& record);

}  // namespace irgld
