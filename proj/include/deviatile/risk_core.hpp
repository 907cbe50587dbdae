#pragma once

#include <span>
#include <string>

#include "deviatile/distributions.hpp"

namespace deviatile {

enum class Measure { VaR, ES, Expectile, Variantile, Deviatile };
enum class Method {
  exact_numeric,
  empirical,
  asymptotic_1st,
  asymptotic_2nd,
  estimator_intermediate,
  estimator_extreme
};

std::string to_string(Measure m);
std::string to_string(Method m);

struct RiskMeasureValue {
  Measure measure;
  double level;
  double value;
  Method method;
};

// Partial moments of X about a point e:
// upper_k = E[(X-e)_+^k], lower_k = E[(X-e)_-^k].
struct PartialMoments {
  double e = 0.0;
  double upper1 = 0.0;
  double lower1 = 0.0;
  double upper2 = 0.0;
  double lower2 = 0.0;
};

// First-order partial moments only (what the expectile equation needs).
PartialMoments first_partial_moments(const Distribution& d, double e);
// Both orders. Requires a finite variance.
PartialMoments partial_moments(const Distribution& d, double e);

// Root of tau E[(X-e)_+] = (1-tau) E[(X-e)_-].
double true_expectile(const Distribution& d, double tau);
double true_variantile(const Distribution& d, double tau);
double true_deviatile(const Distribution& d, double tau);
double true_es(const Distribution& d, double tau);

RiskMeasureValue true_value(const Distribution& d, Measure m, double tau);

// Plug-in versions on a sample; the unsorted overloads sort a copy.
double empirical_expectile(const SortedSample& s, double tau);
double empirical_expectile(std::span<const double> values, double tau);
double empirical_deviatile(const SortedSample& s, double tau);
double empirical_deviatile(std::span<const double> values, double tau);

}  // namespace deviatile
