#pragma once

#include <functional>

#include "irgld/model.hpp"

namespace irgld {

// Adaptive tanh-sinh quadrature of f over [a, b]; tolerates integrable
// endpoint singularities.
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12);

// E[f(W)] for the Pareto weight law, through the substitution
// u = (w / w_min)^-alpha which maps [w_min, inf) onto (0, 1].
double expect_weight(const WeightDist& dist, const std::function<double(double)>& f, double rel_tol = 1e-12);

}  // namespace irgld
