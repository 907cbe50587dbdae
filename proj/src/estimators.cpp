#include "deviatile/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "deviatile/asymptotics.hpp"
#include "deviatile/error.hpp"
#include "deviatile/numerics.hpp"

namespace deviatile {

std::string to_string(CiMethod m) {
  switch (m) {
    case CiMethod::none: return "none";
    case CiMethod::asymptotic: return "asymptotic";
    case CiMethod::block_bootstrap: return "block_bootstrap";
  }
  return "unknown";
}

namespace {

void check_level(double tau, const char* name) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw InvalidArgument(std::string(name) + " must lie strictly inside (0,1)");
  }
}

void check_threshold(const SortedSample& s, std::size_t k) {
  const std::size_t n = s.size();
  if (n < 2) throw InvalidArgument("hill: need at least two observations");
  if (k < 1 || k > n - 1) {
    throw InvalidArgument("hill: k = " + std::to_string(k) + " outside [1, " +
                          std::to_string(n - 1) + "]");
  }
}

double threshold_log(const SortedSample& s, std::size_t k) {
  const double x = s.from_top(k);
  if (!(x > 0.0)) {
    throw InvalidArgument("hill: order statistic X_{n-" + std::to_string(k) +
                          ",n} is not positive");
  }
  return std::log(x);
}

// beta_gamma extended by its limit 1 at gamma = 0.
double beta_hat(double g) {
  if (!(g < 0.5)) {
    throw EstimationFailure("deviatile estimator needs gamma_hat < 1/2", g);
  }
  if (g <= 0.0) return 1.0;
  return beta_gamma(g);
}

// Estimated level-tau value of a measure relative to q_hat_tau.
double measure_factor(Measure m, double g) {
  switch (m) {
    case Measure::VaR:
      return 1.0;
    case Measure::ES:
      if (!(g < 1.0)) throw EstimationFailure("ES estimator needs gamma_hat < 1", g);
      return 1.0 / (1.0 - g);
    case Measure::Expectile:
      if (!(g < 1.0)) throw EstimationFailure("expectile estimator needs gamma_hat < 1", g);
      if (g <= 0.0) return 1.0;
      return std::pow(1.0 / g - 1.0, -g);
    case Measure::Deviatile:
      return beta_hat(g);
    case Measure::Variantile:
      break;
  }
  throw InvalidArgument("no tail estimator for measure " + to_string(m));
}

RiskEstimate make_estimate(Measure m, double g, double q_hat, double tau, std::optional<double> p,
                           std::size_t k) {
  RiskEstimate est;
  est.measure = m;
  est.base_level = tau;
  est.gamma_hat = g;
  est.k_used = k;
  est.point = measure_factor(m, g) * q_hat;
  est.level = tau;
  est.method = Method::estimator_intermediate;
  if (p) {
    est.point *= extrapolation_factor(tau, *p, g);
    est.level = *p;
    est.method = Method::estimator_extreme;
  }
  return est;
}

}  // namespace

TailFit hill(const SortedSample& s, std::size_t k) {
  check_threshold(s, k);
  const double base = threshold_log(s, k);
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += std::log(s.from_top(i));
  TailFit fit;
  fit.k = k;
  fit.n = s.size();
  fit.gamma_hat = acc / static_cast<double>(k) - base;
  return fit;
}

std::vector<std::pair<std::size_t, double>> hill_curve(const SortedSample& s, std::size_t k_min,
                                                       std::size_t k_max) {
  if (k_min > k_max) throw InvalidArgument("hill_curve: k_min > k_max");
  check_threshold(s, k_min);
  check_threshold(s, k_max);
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(k_max - k_min + 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < k_min; ++i) acc += std::log(s.from_top(i));
  for (std::size_t k = k_min; k <= k_max; ++k) {
    const double base = threshold_log(s, k);
    out.emplace_back(k, acc / static_cast<double>(k) - base);
    acc += base;
  }
  return out;
}

TailFit hill_with_curve(const SortedSample& s, std::size_t k, std::size_t k_min,
                        std::size_t k_max) {
  TailFit fit = hill(s, k);
  fit.hill_curve = hill_curve(s, k_min, k_max);
  return fit;
}

std::size_t exceedance_count(std::size_t n, double tau) {
  check_level(tau, "level tau");
  const double x = static_cast<double>(n) * (1.0 - tau);
  return static_cast<std::size_t>(std::floor(x * (1.0 + 1e-9)));
}

double intermediate_quantile(const SortedSample& s, double tau) {
  const std::size_t j = exceedance_count(s.size(), tau);
  if (j == 0) {
    throw InvalidArgument("level " + std::to_string(tau) + " is beyond the data for n = " +
                          std::to_string(s.size()) +
                          " (floor(n(1-tau)) = 0); use the extreme-level estimator");
  }
  if (j >= s.size()) throw InvalidArgument("level tau too small for the sample size");
  return s.from_top(j);
}

double extrapolation_factor(double tau, double p, double gamma_hat) {
  check_level(tau, "base level tau");
  check_level(p, "extreme level p");
  if (p < tau) throw InvalidArgument("extreme level p must be >= base level tau");
  return std::pow((1.0 - p) / (1.0 - tau), -gamma_hat);
}

RiskEstimate intermediate_deviatile(const SortedSample& s, double tau, std::size_t k) {
  const TailFit fit = hill(s, k);
  return make_estimate(Measure::Deviatile, fit.gamma_hat, intermediate_quantile(s, tau), tau,
                       std::nullopt, k);
}

RiskEstimate extreme_deviatile(const SortedSample& s, double tau, double p, std::size_t k) {
  check_level(p, "extreme level p");
  if (p < tau) throw InvalidArgument("extreme level p must be >= base level tau");
  const TailFit fit = hill(s, k);
  return make_estimate(Measure::Deviatile, fit.gamma_hat, intermediate_quantile(s, tau), tau, p,
                       k);
}

const MeasureOutcome& CompanionTable::at(Measure m) const {
  for (const auto& o : outcomes) {
    if (o.measure == m) return o;
  }
  throw InvalidArgument("companion table has no entry for " + to_string(m));
}

CompanionTable companion_from_inputs(double gamma_hat, double q_hat, double tau,
                                     std::optional<double> p, std::size_t k) {
  check_level(tau, "level tau");
  if (p) {
    check_level(*p, "extreme level p");
    if (*p < tau) throw InvalidArgument("extreme level p must be >= base level tau");
  }
  CompanionTable t;
  t.gamma_hat = gamma_hat;
  t.q_hat = q_hat;
  t.tau = tau;
  t.p = p;
  t.k = k;
  for (Measure m : {Measure::VaR, Measure::ES, Measure::Expectile, Measure::Deviatile}) {
    MeasureOutcome o{m, std::nullopt, std::nullopt, {}};
    try {
      o.intermediate = make_estimate(m, gamma_hat, q_hat, tau, std::nullopt, k);
      if (p) o.extreme = make_estimate(m, gamma_hat, q_hat, tau, p, k);
    } catch (const EstimationFailure& e) {
      o.error = e.what();
    }
    t.outcomes.push_back(std::move(o));
  }
  return t;
}

CompanionTable companion_estimators(const SortedSample& s, double tau, std::optional<double> p,
                                    std::size_t k) {
  const TailFit fit = hill(s, k);
  return companion_from_inputs(fit.gamma_hat, intermediate_quantile(s, tau), tau, p, k);
}

AsymptoticInterval asymptotic_ci(const RiskEstimate& est, const TailFit& fit, double rho_hint,
                                 double coverage) {
  if (fit.k < 1) throw InvalidArgument("asymptotic_ci: tail fit has no threshold");
  if (rho_hint > 0.0) throw InvalidArgument("asymptotic_ci: rho_hint must be <= 0");
  const double g = fit.gamma_hat;
  const double root_k = std::sqrt(static_cast<double>(fit.k));

  AsymptoticInterval out;
  out.z = numerics::two_sided_z(coverage);
  if (est.method == Method::estimator_extreme) {
    out.relative_sd = g * std::log((1.0 - est.base_level) / (1.0 - est.level)) / root_k;
    out.bias_slope = 1.0 / (1.0 - rho_hint);
  } else {
    if (!(g < 0.5)) throw EstimationFailure("asymptotic_ci: gamma_hat must be < 1/2", g);
    if (g > 0.0) {
      out.relative_sd = std::sqrt(v_gamma(g)) / root_k;
      out.bias_slope = m_gamma(g) / (1.0 - rho_hint);
    }
  }
  out.estimate = est;
  out.estimate.k_used = fit.k;
  const double half = out.z * out.relative_sd * std::abs(est.point);
  out.estimate.ci_low = est.point - half;
  out.estimate.ci_high = est.point + half;
  out.estimate.ci_method = CiMethod::asymptotic;
  return out;
}

double evaluate(const EstimatorSpec& spec, const SortedSample& s) {
  const std::size_t k = spec.k == 0 ? exceedance_count(s.size(), spec.tau) : spec.k;
  const TailFit fit = hill(s, k);
  return make_estimate(spec.measure, fit.gamma_hat, intermediate_quantile(s, spec.tau), spec.tau,
                       spec.p, k)
      .point;
}

}  // namespace deviatile
