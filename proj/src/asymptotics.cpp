#include "deviatile/asymptotics.hpp"

#include <cmath>

#include "deviatile/error.hpp"
#include "deviatile/numerics.hpp"

namespace deviatile {

namespace {

void check_gamma_half(double gamma) {
  if (!(gamma > 0.0 && gamma < 0.5)) {
    throw InvalidArgument("tail index gamma must lie in (0, 1/2)");
  }
}

// (1/gamma - 1)^{-rho} - 1) / rho, continuous at rho = 0.
double power_log_ratio(double gamma, double rho) {
  const double b = 1.0 / gamma - 1.0;
  if (rho == 0.0) return -std::log(b);
  return std::expm1(-rho * std::log(b)) / rho;
}

}  // namespace

double beta_gamma(double gamma) {
  check_gamma_half(gamma);
  return std::pow(1.0 / gamma - 1.0, -gamma) / std::sqrt(1.0 - 2.0 * gamma);
}

double gamma_star() {
  // f(g) = (1/g - 1)^-g - sqrt(1 - 2g): f < 0 near 0 (beta < 1), f > 0 near 1/2.
  static const double root = numerics::bisect(
      [](double g) { return std::pow(1.0 / g - 1.0, -g) - std::sqrt(1.0 - 2.0 * g); }, 1e-6,
      0.5 - 1e-9, 1e-14);
  return root;
}

double xi2(double gamma, double rho) {
  check_gamma_half(gamma);
  if (rho > 0.0) throw InvalidArgument("second-order parameter rho must be <= 0");
  const double b = 1.0 / gamma - 1.0;
  const double brho = std::pow(b, -rho);
  return brho * (2.0 - 3.0 * gamma - rho) / ((1.0 - rho - 2.0 * gamma) * (1.0 - rho - gamma)) +
         power_log_ratio(gamma, rho);
}

ExpansionTerms expansion_terms(double gamma, double rho, double mean) {
  ExpansionTerms t;
  t.gamma = gamma;
  t.rho = rho;
  t.beta_gamma = beta_gamma(gamma);
  t.xi1 = (2.0 * gamma - 1.0) * std::pow(1.0 / gamma - 1.0, gamma) * mean;
  t.xi2 = xi2(gamma, rho);
  t.mean = mean;
  return t;
}

ExpansionTerms expansion_terms(const Distribution& d) {
  const TwoRVMeta meta = d.tail();
  return expansion_terms(meta.gamma, meta.rho, d.mean());
}

double first_order_deviatile(const Distribution& d, double tau) {
  return beta_gamma(d.tail_index()) * d.quantile(tau);
}

double second_order_deviatile(const Distribution& d, double tau) {
  const TwoRVMeta meta = d.tail();
  const ExpansionTerms t = expansion_terms(meta.gamma, meta.rho, d.mean());
  const double q = d.quantile(tau);
  const double a = meta.aux(1.0 / (1.0 - tau));
  return t.beta_gamma * q * (1.0 + t.xi1 / q + t.xi2 * a);
}

ExpectileExpansion expectile_expansion(const Distribution& d, double tau) {
  const TwoRVMeta meta = d.tail();
  const double g = meta.gamma;
  const double rho = meta.rho;
  if (!(g > 0.0 && g < 1.0)) throw InvalidArgument("expectile expansion needs gamma in (0,1)");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("level must lie strictly inside (0,1)");
  const double b = 1.0 / g - 1.0;
  const double q = d.quantile(tau);
  const double a = meta.aux(1.0 / (1.0 - tau));
  const double mean = d.mean();
  const double brho = std::pow(b, -rho);

  const double eta = -std::pow(b, g) * mean / q - brho / (g * (1.0 - rho - g)) * a;
  const double r =
      g * std::pow(b, g) * mean / q + (brho / (1.0 - rho - g) + power_log_ratio(g, rho)) * a;

  ExpectileExpansion out;
  out.e_over_q_limit = std::pow(b, -g);
  out.fbar_ratio_limit = b;
  out.e_over_q = out.e_over_q_limit * (1.0 + r);
  out.fbar_ratio = b * (1.0 + eta);
  return out;
}

double m_gamma(double gamma) {
  check_gamma_half(gamma);
  return -std::log(1.0 / gamma - 1.0) + 1.0 / (1.0 - gamma) + 1.0 / (1.0 - 2.0 * gamma);
}

double v_gamma(double gamma) {
  const double m = m_gamma(gamma);
  return gamma * gamma * (1.0 + m * m);
}

LimitLawConstants limit_law_constants(double gamma, double rho, double lambda1, double lambda2,
                                      double mean) {
  check_gamma_half(gamma);
  if (rho > 0.0) throw InvalidArgument("second-order parameter rho must be <= 0");
  const ExpansionTerms t = expansion_terms(gamma, rho, mean);
  LimitLawConstants c;
  c.m_gamma = m_gamma(gamma);
  c.v_gamma = gamma * gamma * (1.0 + c.m_gamma * c.m_gamma);
  c.bias = c.m_gamma * lambda2 / (1.0 - rho) - (lambda1 * t.xi1 + lambda2 * t.xi2);
  return c;
}

}  // namespace deviatile
