#include <doctest.h>

#include <cmath>
#include <numeric>

#include "deviatile/asymptotics.hpp"
#include "deviatile/error.hpp"
#include "deviatile/estimators.hpp"

using namespace deviatile;

namespace {

SortedSample shifted_pareto(double alpha, std::size_t n, std::uint64_t seed) {
  // Lomax + theta is an exact Pareto tail with no second-order term.
  auto v = draw_iid(Distribution::pareto(alpha), n, seed);
  for (double& x : v) x += 1.0;
  return SortedSample::from_unsorted(std::move(v));
}

SortedSample iota_sample(std::size_t n) {
  std::vector<double> v(n);
  std::iota(v.begin(), v.end(), 1.0);
  return SortedSample::from_sorted(std::move(v));
}

}  // namespace

TEST_CASE("hill on small samples") {
  CHECK(hill(SortedSample::from_sorted({1, 2, 4, 8}), 2).gamma_hat ==
        doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-15));
  CHECK(hill(SortedSample::from_sorted({1, 2, 4, 8}), 2).gamma_hat ==
        doctest::Approx(1.039721).epsilon(1e-6));
  CHECK(hill(SortedSample::from_sorted({3, 3, 3, 3, 3}), 4).gamma_hat == 0.0);
  CHECK_THROWS_AS(hill(SortedSample::from_sorted({1, 2, 4, 8}), 4), InvalidArgument);
  CHECK_THROWS_AS(hill(SortedSample::from_sorted({1, 2, 4, 8}), 0), InvalidArgument);
  CHECK_THROWS_AS(hill(SortedSample::from_sorted({-1, 0, 4, 8}), 2), InvalidArgument);
  CHECK_THROWS_AS(hill(SortedSample::from_sorted({5.0}), 1), InvalidArgument);
}

TEST_CASE("hill curve agrees with pointwise hill") {
  const auto s = sample_iid(Distribution::student_t(4.0), 2000, 17);
  const auto curve = hill_curve(s, 10, 150);
  REQUIRE(curve.size() == 141);
  for (const auto& [k, g] : curve) {
    CHECK(g == doctest::Approx(hill(s, k).gamma_hat).epsilon(1e-12));
  }
  const TailFit fit = hill_with_curve(s, 50, 10, 12);
  CHECK(fit.hill_curve.size() == 3);
  CHECK(fit.k == 50);
  CHECK_THROWS_AS(hill_curve(s, 20, 10), InvalidArgument);
  CHECK_THROWS_AS(hill_curve(s, 10, 2000), InvalidArgument);
}

TEST_CASE("hill on an exact Pareto(5) tail") {
  const auto s = shifted_pareto(5.0, 10000, 20240101);
  const double g = hill(s, 100).gamma_hat;
  CHECK(std::abs(g - 0.2) < 3 * 0.2 / 10.0);
}

TEST_CASE("intermediate quantile index arithmetic") {
  CHECK(exceedance_count(100, 0.95) == 5);
  CHECK(exceedance_count(1000, 0.99) == 10);
  CHECK(exceedance_count(10000, 0.9996) == 4);
  CHECK(exceedance_count(10, 0.95) == 0);
  const auto s = iota_sample(100);
  CHECK(intermediate_quantile(s, 0.95) == 95.0);
  CHECK(intermediate_quantile(iota_sample(1000), 0.99) == 990.0);
  try {
    intermediate_quantile(iota_sample(10), 0.95);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("extreme-level") != std::string::npos);
  }
}

TEST_CASE("extrapolation factor") {
  CHECK(extrapolation_factor(0.95, 0.999, 0.3885) ==
        doctest::Approx(std::pow(50.0, 0.3885)).epsilon(1e-13));
  CHECK(extrapolation_factor(0.9, 0.9, 0.4) == 1.0);
  CHECK_THROWS_AS(extrapolation_factor(0.99, 0.95, 0.2), InvalidArgument);
  CHECK_THROWS_AS(extrapolation_factor(0.95, 1.0, 0.2), InvalidArgument);
}

TEST_CASE("intermediate deviatile") {
  const auto s = sample_iid(Distribution::student_t(3.0), 5000, 5);
  const RiskEstimate est = intermediate_deviatile(s, 0.99, 100);
  const double g = hill(s, 100).gamma_hat;
  CHECK(est.point == doctest::Approx(beta_gamma(g) * intermediate_quantile(s, 0.99)).epsilon(1e-15));
  CHECK(est.k_used == 100);
  CHECK(est.gamma_hat == g);
  CHECK(est.level == 0.99);
  CHECK(est.method == Method::estimator_intermediate);
  CHECK(est.ci_method == CiMethod::none);
  CHECK_FALSE(est.ci_low.has_value());
}

TEST_CASE("gamma_hat at or above one half fails without clamping") {
  // Top log-spacings of a power sequence with gamma = 0.8.
  std::vector<double> v;
  for (int i = 1; i <= 200; ++i) v.push_back(std::pow(200.0 / i, 0.8));
  const auto s = SortedSample::from_unsorted(v);
  try {
    intermediate_deviatile(s, 0.9, 50);
    FAIL("expected EstimationFailure");
  } catch (const EstimationFailure& e) {
    CHECK(e.gamma_hat() > 0.5);
  }
  CHECK_THROWS_AS(extreme_deviatile(s, 0.9, 0.99, 50), EstimationFailure);
}

TEST_CASE("extreme deviatile") {
  const auto s = sample_iid(Distribution::student_t(5.0), 10000, 11);
  const RiskEstimate mid = intermediate_deviatile(s, 0.99, 100);
  const RiskEstimate same = extreme_deviatile(s, 0.99, 0.99, 100);
  CHECK(same.point == mid.point);
  const RiskEstimate far = extreme_deviatile(s, 0.99, 0.9996, 100);
  CHECK(far.point == doctest::Approx(mid.point * std::pow(0.04 / 1.0, -mid.gamma_hat)).epsilon(1e-13));
  CHECK(far.method == Method::estimator_extreme);
  CHECK(far.level == 0.9996);
  CHECK(far.base_level == 0.99);
  CHECK_THROWS_AS(extreme_deviatile(s, 0.99, 0.95, 100), InvalidArgument);
}

TEST_CASE("companion formulas from published inputs") {
  const CompanionTable t = companion_from_inputs(0.3885, 2.1774, 0.95, 0.999);
  const double es = t.at(Measure::ES).intermediate->point;
  const double ex = t.at(Measure::Expectile).intermediate->point;
  const double q = t.at(Measure::VaR).intermediate->point;
  const double dev = t.at(Measure::Deviatile).intermediate->point;
  CHECK(q == 2.1774);
  CHECK(es == doctest::Approx(2.1774 / (1 - 0.3885)).epsilon(1e-15));
  CHECK(std::abs(es - 3.5611) <= 5e-4);
  CHECK(std::abs(ex - 1.8257) <= 5e-4);
  CHECK(dev == doctest::Approx(beta_gamma(0.3885) * 2.1774).epsilon(1e-15));
  CHECK(ex < q);
  CHECK(q < dev);
  // 0.3885 lies above the crossover where beta_gamma = 1/(1 - gamma).
  CHECK(es < dev);
  const double f = std::pow(50.0, 0.3885);
  for (const auto& o : t.outcomes) {
    CAPTURE(to_string(o.measure));
    REQUIRE(o.extreme.has_value());
    CHECK(o.extreme->point == doctest::Approx(o.intermediate->point * f).epsilon(1e-13));
    CHECK(o.extreme->level == 0.999);
  }
}

TEST_CASE("companion applicability is reported per measure") {
  const CompanionTable mid = companion_from_inputs(0.7, 1.0, 0.95, std::nullopt);
  CHECK(mid.at(Measure::VaR).intermediate.has_value());
  CHECK(mid.at(Measure::ES).intermediate.has_value());
  CHECK_FALSE(mid.at(Measure::Deviatile).intermediate.has_value());
  CHECK_FALSE(mid.at(Measure::Deviatile).error.empty());
  CHECK_FALSE(mid.at(Measure::VaR).extreme.has_value());
  const CompanionTable heavy = companion_from_inputs(1.2, 1.0, 0.95, std::nullopt);
  CHECK_FALSE(heavy.at(Measure::ES).intermediate.has_value());
  CHECK_FALSE(heavy.at(Measure::Expectile).intermediate.has_value());
  CHECK(heavy.at(Measure::VaR).error.empty());
  CHECK_THROWS_AS(mid.at(Measure::Variantile), InvalidArgument);
}

TEST_CASE("companion estimators on a sample") {
  const auto s = sample_iid(Distribution::student_t(3.0), 4000, 99);
  const CompanionTable t = companion_estimators(s, 0.95, 0.999, 200);
  CHECK(t.gamma_hat == hill(s, 200).gamma_hat);
  CHECK(t.q_hat == intermediate_quantile(s, 0.95));
  CHECK(t.at(Measure::Deviatile).intermediate->point ==
        intermediate_deviatile(s, 0.95, 200).point);
  CHECK(t.at(Measure::Deviatile).extreme->point == extreme_deviatile(s, 0.95, 0.999, 200).point);
}

TEST_CASE("asymptotic interval") {
  const auto s = sample_iid(Distribution::student_t(5.0), 10000, 3);
  const TailFit fit = hill(s, 100);
  const RiskEstimate est = intermediate_deviatile(s, 0.99, 100);
  const AsymptoticInterval a = asymptotic_ci(est, fit, -1.0, 0.95);
  const double half = 1.959963984540054 * std::sqrt(v_gamma(fit.gamma_hat)) / 10.0 * est.point;
  CHECK(*a.estimate.ci_high - est.point == doctest::Approx(half).epsilon(1e-12));
  CHECK(est.point - *a.estimate.ci_low == doctest::Approx(half).epsilon(1e-12));
  CHECK(a.estimate.ci_method == CiMethod::asymptotic);
  CHECK(a.bias_slope == doctest::Approx(m_gamma(fit.gamma_hat) / 2.0));

  const AsymptoticInterval zero = asymptotic_ci(est, fit, -1.0, 0.0);
  CHECK(*zero.estimate.ci_low == est.point);
  CHECK(*zero.estimate.ci_high == est.point);

  TailFit wider = fit;
  wider.k = 400;
  const AsymptoticInterval narrow = asymptotic_ci(est, wider, -1.0, 0.95);
  CHECK(narrow.estimate.point == a.estimate.point);
  CHECK(*narrow.estimate.ci_high - *narrow.estimate.ci_low <
        *a.estimate.ci_high - *a.estimate.ci_low);

  const RiskEstimate far = extreme_deviatile(s, 0.99, 0.9996, 100);
  const AsymptoticInterval b = asymptotic_ci(far, fit);
  const double half_far =
      1.959963984540054 * fit.gamma_hat * std::log(0.01 / 0.0004) / 10.0 * far.point;
  CHECK(*b.estimate.ci_high - far.point == doctest::Approx(half_far).epsilon(1e-12));
  CHECK(*b.estimate.ci_low <= far.point);
  CHECK_THROWS_AS(asymptotic_ci(est, fit, 0.5), InvalidArgument);
}

TEST_CASE("asymptotic interval coverage, 500 Pareto(5,1) replicates" * doctest::may_fail()) {
  // Nominal 95% intervals ignore the bias term; the target is at least 85%.
  const auto d = Distribution::pareto(5.0);
  const double truth = true_deviatile(d, 0.99);
  int covered = 0;
  for (std::uint64_t r = 0; r < 500; ++r) {
    const auto s = sample_iid(d, 10000, 20240101 + r);
    const TailFit fit = hill(s, 100);
    const auto a = asymptotic_ci(intermediate_deviatile(s, 0.99, 100), fit);
    covered += *a.estimate.ci_low <= truth && truth <= *a.estimate.ci_high;
  }
  MESSAGE("coverage " << covered / 500.0);
  CHECK(covered >= 425);
}

TEST_CASE("evaluate follows the estimator spec") {
  const auto s = sample_iid(Distribution::student_t(4.0), 3000, 8);
  EstimatorSpec spec;
  spec.tau = 0.95;
  CHECK(evaluate(spec, s) == intermediate_deviatile(s, 0.95, 150).point);
  spec.k = 60;
  spec.p = 0.999;
  CHECK(evaluate(spec, s) == extreme_deviatile(s, 0.95, 0.999, 60).point);
  spec.measure = Measure::ES;
  spec.p.reset();
  CHECK(evaluate(spec, s) == doctest::Approx(intermediate_quantile(s, 0.95) /
                                             (1 - hill(s, 60).gamma_hat)));
  spec.measure = Measure::Variantile;
  CHECK_THROWS_AS(evaluate(spec, s), InvalidArgument);
}
