#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deviatile/distributions.hpp"
#include "deviatile/risk_core.hpp"

namespace deviatile {

struct TailFit {
  double gamma_hat = 0.0;
  std::size_t k = 0;
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, double>> hill_curve;  // (k, gamma_hat(k))
};

enum class CiMethod { none, asymptotic, block_bootstrap };
std::string to_string(CiMethod m);

struct RiskEstimate {
  Measure measure = Measure::Deviatile;
  double level = 0.0;       // tau for intermediate, p for extreme
  double base_level = 0.0;  // tau the estimate was built from
  double point = 0.0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  CiMethod ci_method = CiMethod::none;
  std::size_t k_used = 0;
  double gamma_hat = 0.0;
  Method method = Method::estimator_intermediate;
};

// gamma_H = (1/k) sum_{i<k} log X_{n-i,n} - log X_{n-k,n}
TailFit hill(const SortedSample& s, std::size_t k);
// Hill estimates for every k in [k_min, k_max], one pass over the top order
// statistics.
std::vector<std::pair<std::size_t, double>> hill_curve(const SortedSample& s, std::size_t k_min,
                                                       std::size_t k_max);
TailFit hill_with_curve(const SortedSample& s, std::size_t k, std::size_t k_min,
                        std::size_t k_max);

// floor(n(1-tau)); a relative slack of 1e-9 absorbs representation error in
// tau (n = 100, tau = 0.95 must give 5, not 4).
std::size_t exceedance_count(std::size_t n, double tau);

// X_{n - floor(n(1-tau)), n}
double intermediate_quantile(const SortedSample& s, double tau);

// Weissman factor ((1-p)/(1-tau))^-gamma.
double extrapolation_factor(double tau, double p, double gamma_hat);

// beta_hat q_hat_tau with gamma from Hill at threshold k.
RiskEstimate intermediate_deviatile(const SortedSample& s, double tau, std::size_t k);
RiskEstimate extreme_deviatile(const SortedSample& s, double tau, double p, std::size_t k);

// Per-measure outcome of the four-measure table; error is set iff the
// measure is not applicable to the fitted tail index.
struct MeasureOutcome {
  Measure measure;
  std::optional<RiskEstimate> intermediate;
  std::optional<RiskEstimate> extreme;
  std::string error;
};

struct CompanionTable {
  double gamma_hat = 0.0;
  double q_hat = 0.0;
  double tau = 0.0;
  std::optional<double> p;
  std::size_t k = 0;
  std::vector<MeasureOutcome> outcomes;  // VaR, ES, expectile, deviatile

  const MeasureOutcome& at(Measure m) const;
};

// Formula layer: VaR, ES = q/(1-g), expectile = (1/g-1)^-g q and the
// deviatile from a given tail index and intermediate quantile, plus their
// extrapolations to p.
CompanionTable companion_from_inputs(double gamma_hat, double q_hat, double tau,
                                     std::optional<double> p, std::size_t k = 0);
CompanionTable companion_estimators(const SortedSample& s, double tau, std::optional<double> p,
                                    std::size_t k);

struct AsymptoticInterval {
  RiskEstimate estimate;   // with ci_low/ci_high set
  double z = 0.0;
  double relative_sd = 0.0;   // sd of estimate/true - 1
  double bias_slope = 0.0;    // mean shift of the limit law per unit lambda2
};

// Normal-limit interval for an i.i.d. sample. Bias terms are not corrected;
// rho_hint only feeds bias_slope.
AsymptoticInterval asymptotic_ci(const RiskEstimate& est, const TailFit& fit,
                                 double rho_hint = -1.0, double coverage = 0.95);

// What the bootstrap re-runs on every resample.
struct EstimatorSpec {
  Measure measure = Measure::Deviatile;
  double tau = 0.95;
  std::optional<double> p;
  std::size_t k = 0;
};

double evaluate(const EstimatorSpec& spec, const SortedSample& s);

struct BootstrapResult {
  RiskEstimate estimate;
  std::vector<double> replicates;
  std::size_t discarded = 0;
  double sd = 0.0;
};

using SampleEstimator = std::function<double(const SortedSample&)>;

// Stationary bootstrap indices: blocks start uniformly, lengths are
// geometric with the given mean, indices wrap around, the concatenation is
// cut to n.
std::vector<std::size_t> stationary_bootstrap_indices(std::size_t n, double mean_block,
                                                      UniformStream& u);

BootstrapResult block_bootstrap_ci(std::span<const double> path, const EstimatorSpec& spec,
                                   double mean_block, std::size_t reps, double coverage,
                                   std::uint64_t seed, unsigned threads = 1);

BootstrapResult block_bootstrap_ci(std::span<const double> path, const SampleEstimator& estimator,
                                   double mean_block, std::size_t reps, double coverage,
                                   std::uint64_t seed, unsigned threads = 1);

}  // namespace deviatile
