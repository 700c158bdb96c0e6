#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

namespace irgld {

// Parameters (alpha, sigma, q, w_min) of the inhomogeneous scale-free graph.
// Validation happens in the constructor; every other module assumes a valid
// instance.
class ModelParams {
 public:
  ModelParams(double alpha, double sigma, double q, double w_min);

  double alpha() const noexcept { return alpha_; }
  double sigma() const noexcept { return sigma_; }
  double q() const noexcept { return q_; }
  double w_min() const noexcept { return w_min_; }

  ModelParams with_q(double q) const { return {alpha_, sigma_, q, w_min_}; }
  ModelParams with_sigma(double sigma) const { return {alpha_, sigma, q_, w_min_}; }

  bool operator==(const ModelParams&) const = default;

 private:
  double alpha_;
  double sigma_;
  double q_;
  double w_min_;
};

nlohmann::json to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);

// Pareto weight law P(W > w) = L * w^-alpha on [w_min, inf) with the constant
// slowly varying factor L = w_min^alpha.
class WeightDist {
 public:
  WeightDist(double alpha, double w_min);
  explicit WeightDist(const ModelParams& p) : WeightDist(p.alpha(), p.w_min()) {}

  double alpha() const noexcept { return alpha_; }
  double w_min() const noexcept { return w_min_; }
  double L_const() const noexcept { return L_; }

  // Survival function; equals 1 below w_min.
  double tail(double w) const noexcept;
  // P(a <= W < b)
  double mass(double a, double b) const noexcept;
  // Inverse of tail on (0,1].
  double quantile(double u) const;
  // Weight conditioned on W < cutoff, from a uniform u in (0,1].
  double quantile_below(double u, double cutoff) const;
  // Weight conditioned on a <= W < b.
  double quantile_between(double u, double a, double b) const;
  double mean() const noexcept { return alpha_ * w_min_ / (alpha_ - 1.0); }

 private:
  double alpha_;
  double w_min_;
  double L_;
};

double sample_weight(const WeightDist& dist, double u);

// (w1 v w2) * (w1 ^ w2)^sigma
double kernel(double w1, double w2, double sigma);

// q * min(kernel / n, 1)
double edge_probability(double w1, double w2, const ModelParams& params, std::size_t n);

struct KernelRange {
  double inf;
  double sup;
};

// Extremes of the kernel over [a1,b1] x [a2,b2]. The kernel is monotone in
// each argument on either side of the diagonal, so the extremes sit on the
// rectangle corners or where the diagonal crosses the rectangle boundary.
KernelRange kernel_range_on_rect(double a1, double b1, double a2, double b2, double sigma);

// E[kappa_sigma(w, W)] split at w: `upper` integrates x >= w, `lower` x < w.
struct MeanKernel {
  double upper;
  double lower;
  double total() const noexcept { return upper + lower; }
};
MeanKernel mean_kernel(double w, const ModelParams& params);

// Child type given parent type w under the size-biased law
// kappa(w, x) dF(x) / E[kappa(w, W)]; `u_part` picks the mixture component
// and `u_value` inverts its CDF.
double sample_child_weight(double w, const MeanKernel& m, const ModelParams& params, double u_part,
                           double u_value);

}  // namespace irgld
