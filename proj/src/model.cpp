#include "irgld/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace irgld {

ModelParams::ModelParams(double alpha, double sigma, double q, double w_min)
    : alpha_(alpha), sigma_(sigma), q_(q), w_min_(w_min) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must satisfy alpha > 1");
  if (!(sigma < 2.0 * alpha - 1.0)) throw std::invalid_argument("sigma must satisfy sigma < 2*alpha - 1");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in (0, 1]");
  if (!(w_min > 0.0) || !std::isfinite(w_min)) throw std::invalid_argument("w_min must be positive");
}

nlohmann::json to_json(const ModelParams& p) {
  return {{"alpha", p.alpha()}, {"sigma", p.sigma()}, {"q", p.q()}, {"w_min", p.w_min()}};
}

ModelParams params_from_json(const nlohmann::json& j) {
  return {j.at("alpha").get<double>(), j.at("sigma").get<double>(), j.at("q").get<double>(),
          j.at("w_min").get<double>()};
}

WeightDist::WeightDist(double alpha, double w_min) : alpha_(alpha), w_min_(w_min), L_(std::pow(w_min, alpha)) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must satisfy alpha > 1");
  if (!(w_min > 0.0)) throw std::invalid_argument("w_min must be positive");
}

double WeightDist::tail(double w) const noexcept {
  if (w <= w_min_) return 1.0;
  if (std::isinf(w)) return 0.0;
  return std::pow(w / w_min_, -alpha_);
}

double WeightDist::mass(double a, double b) const noexcept { return tail(a) - tail(b); }

double WeightDist::quantile(double u) const {
  if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("quantile requires u in (0, 1]");
  return w_min_ * std::pow(u, -1.0 / alpha_);
}

double WeightDist::quantile_below(double u, double cutoff) const {
  if (!(cutoff > w_min_)) throw std::domain_error("cutoff must exceed w_min");
  return quantile_between(u, w_min_, cutoff);
}

double WeightDist::quantile_between(double u, double a, double b) const {
  if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("quantile requires u in (0, 1]");
  if (!(a < b) || a < w_min_) throw std::domain_error("empty weight interval");
  const double ta = tail(a);
  const double tb = tail(b);
  const double w = quantile(tb + u * (ta - tb));
  return std::clamp(w, a, std::nextafter(b, a));
}

double sample_weight(const WeightDist& dist, double u) {
  if (!(u > 0.0)) throw std::domain_error("u = 0 maps to an infinite weight");
  return dist.quantile(u);
}

double kernel(double w1, double w2, double sigma) {
  if (!(w1 > 0.0) || !(w2 > 0.0)) throw std::domain_error("kernel requires positive weights");
  const double hi = std::max(w1, w2);
  const double lo = std::min(w1, w2);
  if (sigma == 1.0) return hi * lo;
  if (sigma == 0.0) return hi;
  return hi * std::pow(lo, sigma);
}

double edge_probability(double w1, double w2, const ModelParams& params, std::size_t n) {
  if (n == 0) throw std::domain_error("edge_probability requires n >= 1");
  return params.q() * std::min(kernel(w1, w2, params.sigma()) / static_cast<double>(n), 1.0);
}

KernelRange kernel_range_on_rect(double a1, double b1, double a2, double b2, double sigma) {
  std::array<double, 6> cand{};
  std::size_t k = 0;
  cand[k++] = kernel(a1, a2, sigma);
  cand[k++] = kernel(a1, b2, sigma);
  cand[k++] = kernel(b1, a2, sigma);
  cand[k++] = kernel(b1, b2, sigma);
  const double lo = std::max(a1, a2);
  const double hi = std::min(b1, b2);
  if (lo <= hi) {
    cand[k++] = kernel(lo, lo, sigma);
    cand[k++] = kernel(hi, hi, sigma);
  }
  const auto [mn, mx] = std::minmax_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k));
  return {*mn, *mx};
}

MeanKernel mean_kernel(double w, const ModelParams& params) {
  const double a = params.alpha();
  const double s = params.sigma();
  const double wm = params.w_min();
  const double L = std::pow(wm, a);
  w = std::max(w, wm);
  // dF(x) = a L x^{-a-1} dx on [wm, inf)
  const double upper = std::pow(w, s) * a * L * std::pow(w, 1.0 - a) / (a - 1.0);
  const double beta = s - a;
  const double log_ratio = std::log(w / wm);
  double lower = 0.0;
  if (log_ratio > 0.0) {
    // a L w * int_wm^w x^{beta-1} dx
    const double integral = std::abs(beta * log_ratio) < 1e-12
                                ? log_ratio
                                : std::pow(wm, beta) * std::expm1(beta * log_ratio) / beta;
    lower = w * a * L * integral;
  }
  return {upper, lower};
}

double sample_child_weight(double w, const MeanKernel& m, const ModelParams& params, double u_part,
                           double u_value) {
  const double a = params.alpha();
  const double wm = params.w_min();
  if (u_part * m.total() < m.upper || m.lower <= 0.0) {
    // density proportional to x^{-a} on [w, inf)
    return std::max(w, wm) * std::pow(u_value, -1.0 / (a - 1.0));
  }
  // density proportional to x^{beta-1} on [wm, w)
  const double beta = params.sigma() - a;
  const double log_ratio = std::log(w / wm);
  double x;
  if (std::abs(beta * log_ratio) < 1e-12) {
    x = wm * std::exp(u_value * log_ratio);
  } else {
    const double x_beta = beta * log_ratio;
    const double t = std::abs(x_beta) < 0.5 ? std::expm1(x_beta) : std::exp(x_beta) - 1.0;
    x = wm * std::exp(std::log1p(u_value * t) / beta);
  }
  return std::clamp(x, wm, std::nextafter(w, wm));
}

}  // namespace irgld
