#pragma once

#include "deviatile/distributions.hpp"

namespace deviatile {

// (1/gamma - 1)^-gamma / sqrt(1 - 2 gamma); the first-order constant in
// dev_tau ~ beta_gamma q_tau. Diverges as gamma -> 1/2.
double beta_gamma(double gamma);

// Unique gamma in (0, 1/2) with (1/gamma - 1)^-gamma = sqrt(1 - 2 gamma),
// i.e. beta_gamma = 1. Computed once by bisection.
double gamma_star();

struct ExpansionTerms {
  double gamma = 0.0;
  double rho = 0.0;
  double beta_gamma = 0.0;
  double xi1 = 0.0;  // units of X
  double xi2 = 0.0;  // dimensionless
  double mean = 0.0;
};

// xi2 at rho = 0 uses the limit ((g^-1 - 1)^-rho - 1)/rho -> -log(g^-1 - 1).
double xi2(double gamma, double rho);
ExpansionTerms expansion_terms(double gamma, double rho, double mean);
ExpansionTerms expansion_terms(const Distribution& d);

double first_order_deviatile(const Distribution& d, double tau);
// beta_gamma q_tau (1 + xi1/q_tau + xi2 A(1/(1-tau))), o(1) factors dropped.
double second_order_deviatile(const Distribution& d, double tau);

struct ExpectileExpansion {
  double e_over_q = 0.0;          // (g^-1 - 1)^-g (1 + r(tau))
  double fbar_ratio = 0.0;        // S(e_tau)/(1-tau) = (g^-1 - 1)(1 + eta(tau))
  double e_over_q_limit = 0.0;    // (g^-1 - 1)^-g
  double fbar_ratio_limit = 0.0;  // g^-1 - 1
};

// Second-order expectile ratios; requires 0 < gamma < 1.
ExpectileExpansion expectile_expansion(const Distribution& d, double tau);

struct LimitLawConstants {
  double m_gamma = 0.0;
  double v_gamma = 0.0;  // gamma^2 (1 + m^2)
  double bias = 0.0;     // m lambda2/(1-rho) - (lambda1 xi1 + lambda2 xi2)
};

double m_gamma(double gamma);
double v_gamma(double gamma);
LimitLawConstants limit_law_constants(double gamma, double rho, double lambda1, double lambda2,
                                      double mean);

}  // namespace deviatile
