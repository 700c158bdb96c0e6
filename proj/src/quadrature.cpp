#include "irgld/quadrature.hpp"

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace irgld {

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator(15);
  return integrator.integrate(f, a, b, rel_tol);
}

double expect_weight(const WeightDist& dist, const std::function<double(double)>& f, double rel_tol) {
  const double inv_alpha = 1.0 / dist.alpha();
  const double wm = dist.w_min();
  return integrate([&](double u) { return f(wm * std::pow(u, -inv_alpha)); }, 0.0, 1.0, rel_tol);
}

}  // namespace irgld
