#pragma once

#include <functional>

namespace deviatile::numerics {

using Integrand = std::function<double(double)>;

struct QuadratureOptions {
  double abs_tol = 0.0;
  double rel_tol = 1e-13;
  int max_subdivisions = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Globally adaptive 15-point Gauss-Kronrod on a finite interval [a, b].
// Never evaluates f at the endpoints, so integrable endpoint singularities
// are allowed.
QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureOptions& opts = {});

// Integral of f over [a, inf). The half-line is mapped onto (0, 1] through
// x = a + scale * (v^-power - 1). For f(x) ~ x^-s at infinity the mapped
// integrand behaves like v^(power*(s-1) - 1) near 0, so choosing
// power >= 2/(s-1) makes it vanish at the singular end.
QuadratureResult integrate_upper(const Integrand& f, double a, double scale, double power,
                                 const QuadratureOptions& opts = {});

// Integral of f over (-inf, b], mirrored version of integrate_upper.
QuadratureResult integrate_lower(const Integrand& f, double b, double scale, double power,
                                 const QuadratureOptions& opts = {});

// Regularized incomplete beta I_x(a, b). log_beta must be log B(a, b);
// callers in hot loops precompute it.
double incomplete_beta(double a, double b, double x, double log_beta);
double incomplete_beta(double a, double b, double x);

double log_beta(double a, double b);

// Root of a sign-changing continuous f on [lo, hi] by bisection.
double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol,
              int max_iter = 400);

// Standard normal quantile.
double normal_quantile(double p);

// Two-sided z value for a symmetric interval with the given coverage.
double two_sided_z(double coverage);

}  // namespace deviatile::numerics
