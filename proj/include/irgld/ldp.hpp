#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "irgld/branching.hpp"
#include "irgld/model.hpp"

namespace irgld {

enum class HubsStatus {
  below_theta,   // rho <= upper CI edge of theta-hat, hubs = 0
  q_one,         // q = 1 and rho above theta-hat, hubs = 1
  interior,      // bisection value
  integer_point  // bisection value within 1e-6 of an integer with q < 1: only bounds hold there
};

const char* to_string(HubsStatus s);

struct HubsResult {
  double value = 0.0;
  std::size_t ceil = 0;
  HubsStatus status = HubsStatus::below_theta;
  ThetaEstimate theta{};
};

// Real solution h' of E[(1-q)^{|T| h'}] = 1 - rho on a fixed pool (q is the
// pool's). Throws std::domain_error for rho outside [0, 1).
HubsResult hubs(double rho, const TreePool& pool);
HubsResult hubs(double rho, double q, const TreePool& pool);

// Same quantity through z = H^{-1}(1 - rho) and log z / log(1 - q). Only the
// interior case is defined here; returns 0 where hubs() would report
// below_theta and 1 when q = 1.
double hubs_via_inverse(double rho, const TreePool& pool);

// log(1/(1-rho)) / log(1/(1-q))
double hubs_asymptotic(double rho, double q);

// Leading term plus the correction log E[exp(-q m(W))] / log(1/(1-q)), with
// m(w) = E[kappa(w, W)] by quadrature (w E[W] when sigma = 1).
double hubs_asymptotic_refined(double rho, const ModelParams& params);

// E over finite trees of the probability that no particle attaches to a hub
// of rescaled weight y_i; compared with 1 - rho.
bool y_membership(std::span<const double> y, double rho, const TreePool& pool);

struct PhiThreshold {
  double phi = 0.0;
  bool found = false;
  double value = 0.0;  // pool functional at phi
  double se = 0.0;
};

// Largest phi on the grid phi0 * 2^{-k/4}, phi0 = w_min^{-sigma} (1e3 when
// sigma < 0), down to 1e-6, such that
//   E[(1-q)^{|T|(h-1)} prod_x (1 - q min(W_x^sigma phi, 1))] > 1 - rho + 3 se.
PhiThreshold phi_threshold(double rho, std::size_t h, const TreePool& pool);

struct CEstimate {
  double C = 0.0;
  Interval ci{0.0, 0.0};
  std::size_t accepted = 0;
  std::size_t draws = 0;
  bool no_hits = false;
  double phi = 0.0;
  std::size_t h = 0;
  // For every accepted draw, 1 - (no-connection functional): the draw lies in
  // Y_s for exactly the s up to this value.
  std::vector<double> member_levels;
};

// Importance sampling over y_i iid with density alpha phi^alpha y^{-alpha-1}
// on [phi, inf); draw k uses Stream(seed).split(k).
CEstimate estimate_C(double rho, const TreePool& pool, double phi, std::size_t h, std::size_t draws,
                     std::uint64_t seed, unsigned threads = 1);

// C_s / C_rho for each s, from the accepted draws of one estimate.
std::vector<double> c_ratio_curve(const CEstimate& c, std::span<const double> s_grid);

// Draws y from the importance law conditioned on Y_{rho} membership by
// rejection. Throws std::runtime_error after max_tries.
std::vector<double> sample_member(double rho, const TreePool& pool, double phi, std::size_t h, Stream& rng,
                                  std::size_t max_tries = 1'000'000);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// (alpha-1) ceil(hubs) on [theta-hat, 1); +inf otherwise.
double rate_function(double rho, const TreePool& pool);

struct LdpQuantities {
  double rho = 0.0;
  double hubs_value = 0.0;
  std::size_t hubs_ceil = 0;
  HubsStatus status = HubsStatus::below_theta;
  double theta_hat = 0.0;
  double rate = 0.0;
  double C = 0.0;
  Interval C_ci{0.0, 0.0};
  double phi = 0.0;
  bool phi_found = false;
  bool C_no_hits = false;
};

struct LdpOptions {
  std::size_t draws = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double phi_override = 0.0;  // > 0 replaces the grid threshold
};

LdpQuantities compute_ldp(double rho, const TreePool& pool, const LdpOptions& options = {});
nlohmann::json to_json(const LdpQuantities& l);

struct TailPrediction {
  double value = 0.0;
  bool bounds_only = false;
};

// C (n P(W > n))^{ceil(hubs)}
TailPrediction upper_tail_prediction(double rho, std::size_t n, const ModelParams& params,
                                     const LdpQuantities& quantities);

}  // namespace irgld
