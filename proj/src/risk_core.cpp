#include "deviatile/risk_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "deviatile/error.hpp"
#include "deviatile/numerics.hpp"

namespace deviatile {

std::string to_string(Measure m) {
  switch (m) {
    case Measure::VaR: return "VaR";
    case Measure::ES: return "ES";
    case Measure::Expectile: return "expectile";
    case Measure::Variantile: return "variantile";
    case Measure::Deviatile: return "deviatile";
  }
  return "unknown";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::exact_numeric: return "exact_numeric";
    case Method::empirical: return "empirical";
    case Method::asymptotic_1st: return "asymptotic_1st";
    case Method::asymptotic_2nd: return "asymptotic_2nd";
    case Method::estimator_intermediate: return "estimator_intermediate";
    case Method::estimator_extreme: return "estimator_extreme";
  }
  return "unknown";
}

namespace {

constexpr double kQuadRelTol = 1e-13;

void check_level(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("level must lie strictly inside (0,1)");
}

void require_finite_mean(const Distribution& d) {
  if (!(d.tail_index() < 1.0)) {
    throw MomentError("model has an infinite mean (tail index gamma >= 1)");
  }
}

void require_finite_variance(const Distribution& d) {
  if (!(d.tail_index() < 0.5)) {
    throw MomentError(
        "deviatile/variantile need a finite variance: tail index gamma >= 1/2 is not allowed");
  }
}

// Length scale for the half-line substitutions.
double length_scale(const Distribution& d, double e) {
  const double iqr = d.quantile(0.75) - d.quantile(0.25);
  return std::max(iqr, std::abs(e - d.quantile(0.5)));
}

// Substitution power that flattens an integrand decaying like x^-(alpha-k+1).
double mapping_power(double alpha, int k) {
  return std::max(1.0, 2.0 / (alpha - static_cast<double>(k)));
}

double checked(const numerics::QuadratureResult& r, const char* what) {
  if (!r.converged) {
    throw ConvergenceError(std::string("quadrature did not reach tolerance for ") + what);
  }
  return r.value;
}

// k E[(X-e)_+^k] = k * int_e^inf (x-e)^(k-1) S(x) dx
double upper_moment(const Distribution& d, double e, int k, double scale) {
  const double alpha = 1.0 / d.tail_index();
  auto f = [&](double x) {
    const double s = d.survival(x);
    return k == 1 ? s : 2.0 * (x - e) * s;
  };
  numerics::QuadratureOptions opts;
  opts.rel_tol = kQuadRelTol;
  const double lo = std::max(e, d.support_lower());
  double value = checked(numerics::integrate_upper(f, lo, scale, mapping_power(alpha, k), opts),
                         "upper partial moment");
  if (lo > e) {
    // e below the support: the stretch [e, lower] has S = 1.
    const double gap = lo - e;
    value += k == 1 ? gap : gap * gap;
  }
  return value;
}

// E[(X-e)_-^k] = k * int_{-inf}^e (e-x)^(k-1) F(x) dx
double lower_moment(const Distribution& d, double e, int k, double scale) {
  auto f = [&](double x) {
    const double c = d.cdf(x);
    return k == 1 ? c : 2.0 * (e - x) * c;
  };
  numerics::QuadratureOptions opts;
  opts.rel_tol = kQuadRelTol;
  const double lower = d.support_lower();
  if (std::isfinite(lower)) {
    if (e <= lower) return 0.0;
    return checked(numerics::integrate(f, lower, e, opts), "lower partial moment");
  }
  // Left tail of the Student-t mirrors the right one.
  const double alpha = 1.0 / d.tail_index();
  return checked(numerics::integrate_lower(f, e, scale, mapping_power(alpha, k), opts),
                 "lower partial moment");
}

}  // namespace

PartialMoments first_partial_moments(const Distribution& d, double e) {
  require_finite_mean(d);
  const double scale = length_scale(d, e);
  PartialMoments pm;
  pm.e = e;
  pm.upper1 = upper_moment(d, e, 1, scale);
  pm.lower1 = lower_moment(d, e, 1, scale);
  return pm;
}

PartialMoments partial_moments(const Distribution& d, double e) {
  require_finite_variance(d);
  const double scale = length_scale(d, e);
  PartialMoments pm;
  pm.e = e;
  pm.upper1 = upper_moment(d, e, 1, scale);
  pm.lower1 = lower_moment(d, e, 1, scale);
  pm.upper2 = upper_moment(d, e, 2, scale);
  pm.lower2 = lower_moment(d, e, 2, scale);
  return pm;
}

double true_expectile(const Distribution& d, double tau) {
  check_level(tau);
  require_finite_mean(d);

  auto g = [&](double e) {
    const PartialMoments pm = first_partial_moments(d, e);
    return tau * pm.upper1 - (1.0 - tau) * pm.lower1;
  };
  // g is strictly decreasing with g(mean) = (2 tau - 1) E[(X-mean)_+].
  const double mu = d.mean();
  if (tau == 0.5) return mu;
  const double step = std::max(d.quantile(0.75) - d.quantile(0.25), std::abs(mu));
  double lo = mu;
  double hi = mu;
  const double dir = tau > 0.5 ? 1.0 : -1.0;
  double probe = step;
  for (int i = 0; i < 200; ++i) {
    const double e = mu + dir * probe;
    if ((g(e) > 0.0) == (dir > 0.0)) {
      (dir > 0.0 ? lo : hi) = e;
      probe *= 2.0;
    } else {
      (dir > 0.0 ? hi : lo) = e;
      break;
    }
  }
  if (!(lo < hi)) throw ConvergenceError("expectile: failed to bracket the root");

  // Safeguarded Newton with g'(e) = -tau S(e) - (1-tau) F(e).
  double e = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double ge = g(e);
    if (ge > 0.0) {
      lo = e;
    } else {
      hi = e;
    }
    const double slope = -tau * d.survival(e) - (1.0 - tau) * d.cdf(e);
    double next = e - ge / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double tol = 1e-15 * (1.0 + std::abs(e));
    if (std::abs(next - e) <= tol || hi - lo <= tol) {
      e = next;
      const double residual = g(e);
      if (std::abs(residual) > 1e-10 * (1.0 + std::abs(e))) {
        throw ConvergenceError("expectile: residual above tolerance");
      }
      return e;
    }
    e = next;
  }
  throw ConvergenceError("expectile: Newton iteration did not converge");
}

double true_variantile(const Distribution& d, double tau) {
  check_level(tau);
  require_finite_variance(d);
  const PartialMoments pm = partial_moments(d, true_expectile(d, tau));
  return tau * pm.upper2 + (1.0 - tau) * pm.lower2;
}

double true_deviatile(const Distribution& d, double tau) {
  check_level(tau);
  require_finite_variance(d);
  const PartialMoments pm = partial_moments(d, true_expectile(d, tau));
  return std::sqrt(tau / (1.0 - tau) * pm.upper2 + pm.lower2);
}

double true_es(const Distribution& d, double tau) {
  check_level(tau);
  require_finite_mean(d);
  // ES = 1/(1-tau) int_tau^1 q_p dp. With 1-p = (1-tau) w^m the integrand
  // becomes m q(1 - (1-tau) w^m) w^(m-1), which vanishes at w = 0 for
  // m = 2/(1-gamma).
  const double m = 2.0 / (1.0 - d.tail_index());
  const double tail = 1.0 - tau;
  auto f = [&](double w) {
    const double s = tail * std::pow(w, m);
    if (!(s > 1e-300)) return 0.0;
    return m * d.upper_quantile(s) * std::pow(w, m - 1.0);
  };
  numerics::QuadratureOptions opts;
  opts.rel_tol = 1e-12;
  opts.abs_tol = 1e-14 * std::max(1.0, std::abs(d.quantile(tau)));
  return checked(numerics::integrate(f, 0.0, 1.0, opts), "expected shortfall");
}

RiskMeasureValue true_value(const Distribution& d, Measure m, double tau) {
  double v = 0.0;
  switch (m) {
    case Measure::VaR: v = d.quantile(tau); break;
    case Measure::ES: v = true_es(d, tau); break;
    case Measure::Expectile: v = true_expectile(d, tau); break;
    case Measure::Variantile: v = true_variantile(d, tau); break;
    case Measure::Deviatile: v = true_deviatile(d, tau); break;
  }
  return {m, tau, v, Method::exact_numeric};
}

// ---------------------------------------------------------------- empirical

double empirical_expectile(const SortedSample& s, double tau) {
  check_level(tau);
  const auto x = s.values();
  const std::size_t n = x.size();
  if (n == 0) throw InvalidArgument("empirical_expectile: empty sample");

  std::vector<long double> prefix(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  const long double total = prefix[n];
  const long double t = tau;

  // First-order condition G(e) = tau sum (x-e)_+ - (1-tau) sum (e-x)_+;
  // piecewise linear and decreasing between order statistics.
  auto g_at = [&](std::size_t m) {
    const long double e = x[m];
    const long double below = static_cast<long double>(m + 1) * e - prefix[m + 1];
    const long double above = total - prefix[m + 1] - static_cast<long double>(n - m - 1) * e;
    return t * above - (1.0L - t) * below;
  };
  // Smallest m with G(x_m) <= 0.
  std::size_t lo = 0;
  std::size_t hi = n - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (g_at(mid) <= 0.0L) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const std::size_t m = lo;
  if (m == 0) return x[0];
  // Root lies in [x_{m-1}, x_m] with the lowest m points below it.
  const long double j = static_cast<long double>(m);
  const long double num = t * (total - prefix[m]) + (1.0L - t) * prefix[m];
  const long double den = t * (static_cast<long double>(n) - j) + (1.0L - t) * j;
  const double e = static_cast<double>(num / den);
  return std::clamp(e, x[m - 1], x[m]);
}

double empirical_expectile(std::span<const double> values, double tau) {
  return empirical_expectile(
      SortedSample::from_unsorted(std::vector<double>(values.begin(), values.end())), tau);
}

double empirical_deviatile(const SortedSample& s, double tau) {
  if (s.size() < 2) throw InvalidArgument("empirical_deviatile: need at least two observations");
  const double e = empirical_expectile(s, tau);
  const long double w = static_cast<long double>(tau) / (1.0L - tau);
  long double acc = 0.0L;
  for (double x : s.values()) {
    const long double dlt = static_cast<long double>(x) - e;
    acc += dlt > 0 ? w * dlt * dlt : dlt * dlt;
  }
  return std::sqrt(static_cast<double>(acc / static_cast<long double>(s.size())));
}

double empirical_deviatile(std::span<const double> values, double tau) {
  return empirical_deviatile(
      SortedSample::from_unsorted(std::vector<double>(values.begin(), values.end())), tau);
}

}  // namespace deviatile
