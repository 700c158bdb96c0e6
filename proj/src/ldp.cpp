#include "irgld/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "irgld/parallel.hpp"
#include "irgld/quadrature.hpp"

namespace irgld {

namespace {

constexpr double kHubsTol = 1e-9;
constexpr double kIntegerTol = 1e-6;
constexpr double kPhiRatio = 0.8408964152537145;  // 2^{-1/4}
constexpr double kPhiFloor = 1e-6;
constexpr double kZ95 = 1.959963984540054;

void check_rho(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::domain_error("rho must lie in [0, 1) (hubs diverges as rho -> 1)");
}

double log_factorial(std::size_t h) { return std::lgamma(static_cast<double>(h) + 1.0); }

}  // namespace

const char* to_string(HubsStatus s) {
  switch (s) {
    case HubsStatus::below_theta: return "below_theta";
    case HubsStatus::q_one: return "q_one";
    case HubsStatus::interior: return "interior";
    case HubsStatus::integer_point: return "integer_point_bounds_only";
  }
  return "unknown";
}

HubsResult hubs(double rho, const TreePool& pool) {
  check_rho(rho);
  HubsResult r;
  r.theta = estimate_theta(pool);
  if (rho <= r.theta.ci.hi) return r;
  const double q = pool.params().q();
  if (q == 1.0) {
    r.value = 1.0;
    r.ceil = 1;
    r.status = HubsStatus::q_one;
    return r;
  }
  const double target = 1.0 - rho;
  double lo = 0.0;
  double hi = 1.0;
  while (estimate_phi(pool, hi).value >= target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e18) throw std::runtime_error("hubs bracket did not close");
  }
  while (hi - lo > kHubsTol) {
    const double mid = 0.5 * (lo + hi);
    if (estimate_phi(pool, mid).value > target) lo = mid;
    else hi = mid;
  }
  r.value = 0.5 * (lo + hi);
  r.ceil = static_cast<std::size_t>(std::ceil(r.value - kHubsTol));
  const double nearest = std::round(r.value);
  r.status = nearest >= 1.0 && std::abs(r.value - nearest) < kIntegerTol ? HubsStatus::integer_point
                                                                       : HubsStatus::interior;
  return r;
}

HubsResult hubs(double rho, double q, const TreePool& pool) {
  if (q != pool.params().q()) throw std::invalid_argument("q does not match the pool parameters");
  return hubs(rho, pool);
}

double hubs_via_inverse(double rho, const TreePool& pool) {
  check_rho(rho);
  if (rho <= estimate_theta(pool).ci.hi) return 0.0;
  const double q = pool.params().q();
  if (q == 1.0) return 1.0;
  const double target = 1.0 - rho;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (estimate_H(pool, mid) < target) lo = mid;
    else hi = mid;
  }
  return std::log(0.5 * (lo + hi)) / std::log1p(-q);
}

double hubs_asymptotic(double rho, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("hubs_asymptotic requires q in (0, 1)");
  if (!(rho > 0.0 && rho < 1.0)) throw std::domain_error("hubs_asymptotic requires rho in (0, 1)");
  return std::log1p(-rho) / std::log1p(-q);
}

double hubs_asymptotic_refined(double rho, const ModelParams& params) {
  const double q = params.q();
  const double leading = hubs_asymptotic(rho, q);
  const WeightDist dist(params);
  const double sigma = params.sigma();
  auto m = [&](double w) {
    if (sigma == 1.0) return w * dist.mean();
    // split at the kink x = w and integrate both parts in u = P(W > x)
    const double inv_alpha = 1.0 / dist.alpha();
    const double tw = dist.tail(w);
    const double below =
        tw < 1.0 ? integrate([&](double u) { return kernel(w, dist.w_min() * std::pow(u, -inv_alpha), sigma); }, tw,
                             1.0, 1e-10)
                 : 0.0;
    const double above =
        tw * integrate([&](double u) { return kernel(w, w * std::pow(u, -inv_alpha), sigma); }, 0.0, 1.0, 1e-10);
    return below + above;
  };
  const double e = expect_weight(dist, [&](double w) { return std::exp(-q * m(w)); }, 1e-10);
  return leading + std::log(e) / -std::log1p(-q);
}

bool y_membership(std::span<const double> y, double rho, const TreePool& pool) {
  for (double v : y)
    if (!(v > 0.0)) throw std::domain_error("hub weights must be positive");
  return estimate_no_connection(pool, y).value <= 1.0 - rho;
}

PhiThreshold phi_threshold(double rho, std::size_t h, const TreePool& pool) {
  check_rho(rho);
  if (h < 1) throw std::invalid_argument("phi threshold requires h >= 1");
  const auto& p = pool.params();
  const double q = p.q();
  const double base = std::pow(1.0 - q, static_cast<double>(h - 1));
  const double m = static_cast<double>(pool.count());
  double phi = p.sigma() >= 0.0 ? std::pow(p.w_min(), -p.sigma()) : 1e3;
  PhiThreshold out;
  for (; phi >= kPhiFloor; phi *= kPhiRatio) {
    const double y[1] = {phi};
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t i = 0; i < pool.count(); ++i) {
      if (pool.censored(i) || !pool.has_weights(i)) continue;
      const double v = std::pow(base, static_cast<double>(pool.size(i))) * pbar_pow(pool.weight_pows(i), y, q);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / m;
    const double se = std::sqrt(std::max(0.0, sum2 / m - mean * mean) / m);
    if (mean > 1.0 - rho + 3.0 * se) {
      out = {phi, true, mean, se};
      return out;
    }
  }
  return out;
}

CEstimate estimate_C(double rho, const TreePool& pool, double phi, std::size_t h, std::size_t draws,
                     std::uint64_t seed, unsigned threads) {
  check_rho(rho);
  if (!(phi > 0.0)) throw std::domain_error("phi must be positive");
  if (h < 1) throw std::invalid_argument("estimate_C requires h >= 1");
  if (draws < 1) throw std::invalid_argument("estimate_C requires at least one draw");
  const double alpha = pool.params().alpha();
  constexpr std::size_t chunks = 64;
  std::vector<std::vector<double>> levels(std::min(chunks, draws));
  const Stream base(seed);
  parallel_chunks(draws, levels.size(), threads, [&](std::size_t c, std::size_t b, std::size_t e) {
    std::vector<double> y(h);
    for (std::size_t k = b; k < e; ++k) {
      Stream s = base.split(k);
      for (auto& v : y) v = phi * std::pow(s.uniform_pos(), -1.0 / alpha);
      const double value = estimate_no_connection(pool, y).value;
      if (value <= 1.0 - rho) levels[c].push_back(1.0 - value);
    }
  });
  CEstimate out;
  out.phi = phi;
  out.h = h;
  out.draws = draws;
  for (auto& l : levels) out.member_levels.insert(out.member_levels.end(), l.begin(), l.end());
  out.accepted = out.member_levels.size();
  const double scale = std::exp(-alpha * static_cast<double>(h) * std::log(phi) - log_factorial(h));
  const double n = static_cast<double>(draws);
  const double frac = static_cast<double>(out.accepted) / n;
  if (out.accepted == 0) {
    out.no_hits = true;
    out.ci = {0.0, scale * 3.0 / n};
    return out;
  }
  const double half = kZ95 * std::sqrt(frac * (1.0 - frac) / n);
  out.C = scale * frac;
  out.ci = {scale * std::max(0.0, frac - half), scale * (frac + half)};
  return out;
}

std::vector<double> c_ratio_curve(const CEstimate& c, std::span<const double> s_grid) {
  std::vector<double> sorted = c.member_levels;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(s_grid.size());
  for (double s : s_grid) {
    if (sorted.empty()) {
      out.push_back(0.0);
      continue;
    }
    const auto at_least = sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), s);
    out.push_back(static_cast<double>(at_least) / static_cast<double>(sorted.size()));
  }
  return out;
}

std::vector<double> sample_member(double rho, const TreePool& pool, double phi, std::size_t h, Stream& rng,
                                  std::size_t max_tries) {
  const double alpha = pool.params().alpha();
  std::vector<double> y(h);
  for (std::size_t t = 0; t < max_tries; ++t) {
    for (auto& v : y) v = phi * std::pow(rng.uniform_pos(), -1.0 / alpha);
    if (y_membership(y, rho, pool)) {
      std::sort(y.begin(), y.end(), std::greater<>());
      return y;
    }
  }
  throw std::runtime_error("no hub configuration in Y found within the retry cap");
}

double rate_function(double rho, const TreePool& pool) {
  if (!(rho < 1.0)) return kInfinity;
  if (rho < estimate_theta(pool).theta) return kInfinity;
  const auto r = hubs(std::max(rho, 0.0), pool);
  return (pool.params().alpha() - 1.0) * static_cast<double>(r.ceil);
}

LdpQuantities compute_ldp(double rho, const TreePool& pool, const LdpOptions& options) {
  LdpQuantities l;
  l.rho = rho;
  const auto r = hubs(rho, pool);
  l.hubs_value = r.value;
  l.hubs_ceil = r.ceil;
  l.status = r.status;
  l.theta_hat = r.theta.theta;
  l.rate = rate_function(rho, pool);
  if (r.ceil == 0) return l;
  if (options.phi_override > 0.0) {
    l.phi = options.phi_override;
    l.phi_found = true;
  } else {
    const auto t = phi_threshold(rho, r.ceil, pool);
    l.phi = t.phi;
    l.phi_found = t.found;
  }
  if (!l.phi_found) return l;
  const auto c = estimate_C(rho, pool, l.phi, r.ceil, options.draws, options.seed, options.threads);
  l.C = c.C;
  l.C_ci = c.ci;
  l.C_no_hits = c.no_hits;
  return l;
}

nlohmann::json to_json(const LdpQuantities& l) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf"); };
  return {{"rho", l.rho},
          {"hubs_value", l.hubs_value},
          {"hubs_ceil", l.hubs_ceil},
          {"status", to_string(l.status)},
          {"theta_hat", l.theta_hat},
          {"rate", num(l.rate)},
          {"C_estimate", l.C},
          {"C_ci", {l.C_ci.lo, l.C_ci.hi}},
          {"C_no_hits", l.C_no_hits},
          {"phi", l.phi},
          {"phi_found", l.phi_found}};
}

TailPrediction upper_tail_prediction(double /*rho*/, std::size_t n, const ModelParams& params,
                                     const LdpQuantities& quantities) {
  if (quantities.hubs_ceil < 1) throw std::domain_error("tail prediction requires ceil(hubs) >= 1");
  if (n == 0) throw std::domain_error("n must be positive");
  const WeightDist dist(params);
  const double nd = static_cast<double>(n);
  const double base = nd * dist.tail(nd);
  return {quantities.C * std::pow(base, static_cast<double>(quantities.hubs_ceil)),
          quantities.status == HubsStatus::integer_point};
}

}  // namespace irgld
