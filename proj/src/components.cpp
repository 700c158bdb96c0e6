#include <algorithm>
#include <cmath>
#include <numeric>

#include "irgld/graph.hpp"

namespace irgld {

namespace {

struct DisjointSets {
  std::vector<std::uint32_t> parent;
  std::vector<std::uint32_t> size;

  explicit DisjointSets(std::size_t n) : parent(n), size(n, 1) {
    std::iota(parent.begin(), parent.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
  }
};

}  // namespace

std::size_t ComponentStats::vertices_in_size(std::size_t ell) const {
  auto it = count_by_size.find(ell);
  return it == count_by_size.end() ? 0 : it->second * ell;
}

std::vector<std::vector<std::uint32_t>> ComponentStats::members() const {
  std::vector<std::vector<std::uint32_t>> out(roots.size());
  for (std::size_t i = 0; i < roots.size(); ++i) out[i].reserve(sizes[i]);
  for (std::uint32_t v = 0; v < component_id.size(); ++v) {
    const auto pos = std::lower_bound(roots.begin(), roots.end(), component_id[v]) - roots.begin();
    out[static_cast<std::size_t>(pos)].push_back(v);
  }
  return out;
}

ComponentStats components(const Graph& g) {
  const std::size_t n = g.vertex_count();
  DisjointSets ds(n);
  for (const auto& e : g.edges) ds.unite(e.u, e.v);

  ComponentStats s;
  s.component_id.assign(n, 0);
  std::vector<std::uint32_t> smallest(n, std::numeric_limits<std::uint32_t>::max());
  for (std::uint32_t v = 0; v < n; ++v) {
    const auto r = ds.find(v);
    if (smallest[r] == std::numeric_limits<std::uint32_t>::max()) {
      smallest[r] = v;
      s.roots.push_back(v);
      s.sizes.push_back(ds.size[r]);
    }
    s.component_id[v] = smallest[r];
  }
  for (std::size_t sz : s.sizes) {
    ++s.count_by_size[sz];
    s.largest_size = std::max(s.largest_size, sz);
  }
  return s;
}

nlohmann::json to_json(const ComponentStats& stats) {
  nlohmann::json by_size = nlohmann::json::object();
  for (auto [ell, c] : stats.count_by_size) by_size[std::to_string(ell)] = c;
  return {{"components", stats.roots.size()}, {"largest", stats.largest_size}, {"count_by_size", by_size}};
}

std::optional<ComponentType> classify_component(std::span<const double> weights, double eps, double R,
                                                double w_min) {
  if (!(eps > 0.0)) throw std::domain_error("eps must be positive");
  if (!(R > w_min)) throw std::domain_error("R must exceed w_min");
  ComponentType t{weights.size(), {}, eps, R};
  t.buckets.reserve(weights.size());
  for (double w : weights) {
    if (!(w < R)) return std::nullopt;
    if (w < w_min) throw std::domain_error("weight below w_min");
    t.buckets.push_back(static_cast<std::uint32_t>(std::floor((w - w_min) / eps)));
  }
  std::sort(t.buckets.begin(), t.buckets.end());
  return t;
}

TypeCounts count_types(const Graph& g, double eps, double R, std::size_t ell_max) {
  const auto stats = components(g);
  TypeCounts out;
  std::vector<double> ws;
  const auto groups = stats.members();
  for (const auto& group : groups) {
    if (group.size() > ell_max) continue;
    ws.clear();
    for (auto v : group) ws.push_back(g.weights[v]);
    if (auto t = classify_component(ws, eps, R, g.params.w_min())) ++out[*t];
  }
  return out;
}

}  // namespace irgld
