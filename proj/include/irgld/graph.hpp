#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "irgld/model.hpp"
#include "irgld/rng.hpp"

namespace irgld {

struct Edge {
  std::uint32_t u;
  std::uint32_t v;
  auto operator<=>(const Edge&) const = default;
};

// Index of the unordered pair {u, v}, u < v, in the enumeration
// (0,1), (0,2), (1,2), (0,3), ...
constexpr std::uint64_t pair_index(std::uint32_t u, std::uint32_t v) noexcept {
  return static_cast<std::uint64_t>(v) * (v - 1) / 2 + u;
}

// Pairwise: one keyed uniform per vertex pair, O(n^2). Bucketed: vertices are
// grouped into dyadic weight buckets and candidate pairs are drawn with
// geometric skips at a per-bucket-pair upper bound, then thinned; O(n log n + m).
enum class GeneratorPath { pairwise, bucketed };

GeneratorPath parse_generator_path(const std::string& name);
const char* to_string(GeneratorPath path);

struct Graph {
  ModelParams params;
  std::size_t n_model = 0;  // denominator in the connection probability
  std::vector<double> weights;
  std::vector<Edge> edges;  // sorted, u < v
  std::uint64_t seed = 0;

  std::size_t vertex_count() const noexcept { return weights.size(); }
};

struct WeightWindow {
  double lo;
  double hi;
};

enum class PlantMode { replace_top, append };

struct GenerateOptions {
  std::optional<WeightWindow> weight_window;
  std::vector<double> planted_weights;
  PlantMode plant_mode = PlantMode::replace_top;
  // Append mode only: whether the planted vertices count towards n_model.
  bool denominator_includes_planted = true;
  // When set, every non-planted weight is drawn conditioned below this value.
  std::optional<double> hub_cutoff;
  GeneratorPath path = GeneratorPath::pairwise;
  unsigned threads = 1;
};

// Streams derived from a graph seed.
inline Stream weight_stream(std::uint64_t seed) { return Stream(seed).split(0); }
inline Stream edge_stream(std::uint64_t seed) { return Stream(seed).split(1); }
inline Stream coupling_stream(std::uint64_t seed) { return Stream(seed).split(2); }

Graph generate(const ModelParams& params, std::size_t n, std::uint64_t seed, const GenerateOptions& options = {});

// Edges on a fixed weight sequence; each pair {u, v} is present independently
// with edge_probability(w_u, w_v, params, n_model).
Graph generate_on_weights(const ModelParams& params, std::vector<double> weights, std::size_t n_model,
                          std::uint64_t seed, GeneratorPath path = GeneratorPath::pairwise, unsigned threads = 1);

std::vector<Edge> sample_edges(const ModelParams& params, std::span<const double> weights, std::size_t n_model,
                               Stream edges, GeneratorPath path, unsigned threads);

// Sum over pairs of the connection probability.
double expected_edge_count(const ModelParams& params, std::span<const double> weights, std::size_t n_model);

void write_edge_list(const Graph& g, std::ostream& os);
Graph read_edge_list(std::istream& is, const ModelParams& params);

// ---------------------------------------------------------------------------
// Components

struct ComponentStats {
  std::vector<std::uint32_t> component_id;  // smallest vertex index in the component
  std::vector<std::uint32_t> roots;         // distinct component ids, ascending
  std::vector<std::size_t> sizes;           // aligned with roots
  std::size_t largest_size = 0;
  std::map<std::size_t, std::size_t> count_by_size;  // l -> N_{n,l}

  std::size_t vertices_in_size(std::size_t ell) const;  // S_{n,l}
  std::vector<std::vector<std::uint32_t>> members() const;
};

ComponentStats components(const Graph& g);
nlohmann::json to_json(const ComponentStats& stats);

// ---------------------------------------------------------------------------
// Component types on a half-open bucket grid [w_min + i eps, w_min + (i+1) eps)

struct ComponentType {
  std::size_t ell = 0;
  std::vector<std::uint32_t> buckets;  // sorted, size ell
  double eps = 0.0;
  double R = 0.0;

  bool operator==(const ComponentType& o) const { return ell == o.ell && buckets == o.buckets; }
  bool operator<(const ComponentType& o) const {
    return ell != o.ell ? ell < o.ell : buckets < o.buckets;
  }
};

// nullopt when some weight is >= R (no type in CT_l(eps, R)).
std::optional<ComponentType> classify_component(std::span<const double> weights, double eps, double R,
                                                double w_min);

using TypeCounts = std::map<ComponentType, std::size_t>;

// Components of size <= ell_max with every weight below R, grouped by type.
TypeCounts count_types(const Graph& g, double eps, double R, std::size_t ell_max);

// ---------------------------------------------------------------------------
// Discretised approximation (delta-IRG)

struct DeltaIrgModel {
  double delta = 0.0;
  double R = 0.0;
  double w_min = 0.0;
  std::size_t n = 0;
  std::vector<double> z_levels;    // w_min + i delta
  std::vector<double> level_mass;  // P(z_i <= W < z_{i+1})
  std::vector<std::size_t> counts; // ceil((1 - delta) n mass_i)
  std::size_t n_total = 0;

  std::size_t level_count_total() const noexcept { return z_levels.size(); }
  // Level of a weight in [w_min, R).
  std::size_t level_of(double w) const;
};

std::size_t level_count(std::size_t n, double delta, double mass);

DeltaIrgModel build_delta_irg(const ModelParams& params, std::size_t n, double delta, double R);

// Infimum of the kernel over the delta-cells of w1 and w2; 0 if either is >= R.
double kernel_delta(double w1, double w2, const DeltaIrgModel& model, double sigma);

class CouplingUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// iid: weights are iid and the coupling fails if some level holds fewer than
// n_i vertices. conditioned: weights are drawn from their law conditioned on
// every level holding at least n_i vertices.
enum class CouplingWeights { iid, conditioned };

struct CouplingOptions {
  CouplingWeights weights = CouplingWeights::iid;
  GeneratorPath path = GeneratorPath::pairwise;
  unsigned threads = 1;
};

struct CoupledGraphs {
  Graph full;    // G_n[w_min, R)
  Graph approx;  // delta-IRG on the selected vertices, weights rounded down
  std::vector<std::uint32_t> approx_to_full;
  std::vector<std::size_t> level_population;  // |V_n[z_i, z_{i+1})|
  bool regular = false;                       // two-sided regularity event
};

CoupledGraphs generate_coupled(const ModelParams& params, std::size_t n, const DeltaIrgModel& model,
                               std::uint64_t seed, const CouplingOptions& options = {});

bool approx_is_subgraph(const CoupledGraphs& c);
// |E_full \ E_approx|
std::size_t edge_difference(const CoupledGraphs& c);

}  // namespace irgld
