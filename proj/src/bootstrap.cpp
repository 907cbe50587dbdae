#include <cmath>
#include <limits>

#include "deviatile/error.hpp"
#include "deviatile/estimators.hpp"
#include "deviatile/numerics.hpp"
#include "deviatile/parallel.hpp"

namespace deviatile {

std::vector<std::size_t> stationary_bootstrap_indices(std::size_t n, double mean_block,
                                                      UniformStream& u) {
  if (n == 0) throw InvalidArgument("bootstrap: empty path");
  if (!(mean_block >= 1.0)) throw InvalidArgument("bootstrap: mean block length must be >= 1");
  const double p = 1.0 / mean_block;
  const double log_q = std::log1p(-p);  // -inf when p = 1
  std::vector<std::size_t> idx;
  idx.reserve(n);
  while (idx.size() < n) {
    const auto start = static_cast<std::size_t>(u.next() * static_cast<double>(n)) % n;
    // Geometric on {1, 2, ...} with success probability p.
    std::size_t len = 1;
    if (std::isfinite(log_q)) {
      const double extra = std::floor(std::log(u.next()) / log_q);
      len += extra < static_cast<double>(n) ? static_cast<std::size_t>(extra) : n;
    }
    for (std::size_t j = 0; j < len && idx.size() < n; ++j) idx.push_back((start + j) % n);
  }
  return idx;
}

BootstrapResult block_bootstrap_ci(std::span<const double> path, const SampleEstimator& estimator,
                                   double mean_block, std::size_t reps, double coverage,
                                   std::uint64_t seed, unsigned threads) {
  const std::size_t n = path.size();
  if (reps < 1) throw InvalidArgument("bootstrap: reps must be >= 1");
  if (!(mean_block >= 1.0)) throw InvalidArgument("bootstrap: mean block length must be >= 1");
  if (static_cast<double>(n) < mean_block) {
    throw InvalidArgument("bootstrap: path shorter than the mean block length");
  }
  const double z = numerics::two_sided_z(coverage);

  BootstrapResult out;
  out.estimate.point =
      estimator(SortedSample::from_unsorted(std::vector<double>(path.begin(), path.end()),
                                            Provenance::file));

  constexpr double kFailed = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> draws(reps, kFailed);
  parallel_for_index(reps, threads, [&](std::size_t r) {
    UniformStream u(seed + r);
    const auto idx = stationary_bootstrap_indices(n, mean_block, u);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = path[idx[i]];
    try {
      draws[r] = estimator(SortedSample::from_unsorted(std::move(values), Provenance::bootstrap));
    } catch (const EstimationFailure&) {
      // discarded
    } catch (const InvalidArgument&) {
      // e.g. a non-positive Hill threshold in this resample
    }
  });

  for (double d : draws) {
    if (std::isfinite(d)) {
      out.replicates.push_back(d);
    } else {
      ++out.discarded;
    }
  }
  if (5 * out.discarded > reps) {
    throw EstimationFailure("bootstrap: " + std::to_string(out.discarded) + " of " +
                                std::to_string(reps) + " replicates failed (limit 20%)",
                            std::numeric_limits<double>::quiet_NaN());
  }

  const std::size_t m = out.replicates.size();
  out.estimate.ci_method = CiMethod::none;
  if (m >= 2) {
    long double mean = 0.0L;
    for (double d : out.replicates) mean += d;
    mean /= static_cast<long double>(m);
    long double ss = 0.0L;
    for (double d : out.replicates) ss += (d - mean) * (d - mean);
    out.sd = std::sqrt(static_cast<double>(ss / static_cast<long double>(m - 1)));
    out.estimate.ci_low = out.estimate.point - z * out.sd;
    out.estimate.ci_high = out.estimate.point + z * out.sd;
    out.estimate.ci_method = CiMethod::block_bootstrap;
  }
  return out;
}

BootstrapResult block_bootstrap_ci(std::span<const double> path, const EstimatorSpec& spec,
                                   double mean_block, std::size_t reps, double coverage,
                                   std::uint64_t seed, unsigned threads) {
  const std::size_t k = spec.k == 0 ? exceedance_count(path.size(), spec.tau) : spec.k;
  EstimatorSpec fixed = spec;
  fixed.k = k;
  BootstrapResult out = block_bootstrap_ci(
      path, [&fixed](const SortedSample& s) { return evaluate(fixed, s); }, mean_block, reps,
      coverage, seed, threads);
  const SortedSample full =
      SortedSample::from_unsorted(std::vector<double>(path.begin(), path.end()), Provenance::file);
  const TailFit fit = hill(full, k);
  out.estimate.measure = spec.measure;
  out.estimate.base_level = spec.tau;
  out.estimate.level = spec.p.value_or(spec.tau);
  out.estimate.k_used = k;
  out.estimate.gamma_hat = fit.gamma_hat;
  out.estimate.method = spec.p ? Method::estimator_extreme : Method::estimator_intermediate;
  return out;
}

}  // namespace deviatile
