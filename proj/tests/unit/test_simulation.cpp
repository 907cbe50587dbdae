#include <doctest.h>

#include <cmath>

#include "deviatile/asymptotics.hpp"
#include "deviatile/error.hpp"
#include "deviatile/estimators.hpp"
#include "deviatile/risk_core.hpp"
#include "deviatile/simulation.hpp"

using namespace deviatile;

namespace {

ExperimentConfig t5(std::size_t n, std::size_t k, std::size_t reps) {
  ExperimentConfig c;
  c.model.kind = ModelKind::student_t;
  c.model.alpha = 5.0;
  c.n = n;
  c.k = k;
  c.tau = 0.99;
  c.reps = reps;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  ExperimentConfig c = t5(1000, 10, 5);
  CHECK_NOTHROW(c.validate());
  c.reps = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = t5(1000, 10, 5);
  c.p = 0.99;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = t5(1000, 1000, 5);
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = t5(1000, 10, 5);
  c.model.kind = ModelKind::garch;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.true_value_mode = TrueValueMode::monte_carlo;
  CHECK_NOTHROW(c.validate());
  CHECK(model_kind_from_string("student_t") == ModelKind::student_t);
  CHECK_THROWS_AS(model_kind_from_string("normal"), InvalidArgument);
}

TEST_CASE("single replicate") {
  const ExperimentReport r = run_experiment(t5(2000, 20, 1));
  CHECK_FALSE(r.ratio_sd.has_value());
  CHECK(r.mse == doctest::Approx((r.ratio_mean - 1) * (r.ratio_mean - 1)).epsilon(1e-14));
  CHECK(r.successes == 1);
  CHECK(r.true_value == doctest::Approx(3.7075).epsilon(1e-3));
}

TEST_CASE("mse is recomputable from the kept ratios") {
  ExperimentConfig c = t5(2000, 40, 30);
  c.keep_ratios = true;
  const ExperimentReport r = run_experiment(c);
  REQUIRE(r.per_rep_ratios.size() == 30);
  double mse = 0, mean = 0;
  for (double x : r.per_rep_ratios) {
    mse += (x - 1) * (x - 1);
    mean += x;
  }
  CHECK(std::abs(mse / 30 - r.mse) <= 1e-12);
  CHECK(std::abs(mean / 30 - r.ratio_mean) <= 1e-12);
  c.keep_ratios = false;
  CHECK(run_experiment(c).per_rep_ratios.empty());
}

TEST_CASE("replicate r uses seed base_seed + r") {
  ExperimentConfig c = t5(2000, 40, 3);
  c.keep_ratios = true;
  const ExperimentReport r = run_experiment(c);
  const auto d = Distribution::student_t(5.0);
  const double truth = true_deviatile(d, 0.99);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto s = sample_iid(d, 2000, c.base_seed + i);
    CHECK(r.per_rep_ratios[i] == intermediate_deviatile(s, 0.99, 40).point / truth);
  }
}

TEST_CASE("reports are bit-identical across thread counts") {
  ExperimentConfig c = t5(3000, 30, 24);
  c.p = 0.999;
  c.keep_ratios = true;
  const ExperimentReport one = run_experiment(c);
  c.threads = 4;
  const ExperimentReport four = run_experiment(c);
  CHECK(one.per_rep_ratios == four.per_rep_ratios);
  CHECK(one.ratio_mean == four.ratio_mean);
  CHECK(one.mse == four.mse);
  CHECK(*one.ratio_sd == *four.ratio_sd);
}

TEST_CASE("failed replicates are counted, not clamped") {
  ExperimentConfig c;
  c.model.kind = ModelKind::student_t;
  c.model.alpha = 2.2;  // gamma = 0.45, close to the 1/2 boundary
  c.n = 2000;
  c.k = 40;
  c.tau = 0.98;
  c.reps = 60;
  c.threads = 1;
  c.keep_ratios = true;
  const ExperimentReport r = run_experiment(c);
  CHECK(r.failure_count > 0);
  CHECK(r.failure_count + r.successes == 60);
  CHECK(r.per_rep_ratios.size() == r.successes);
  CHECK(r.gamma_hat_mean > 0.35);

  c.model.kind = ModelKind::pareto;
  c.model.alpha = 1.2;  // gamma = 0.83; every replicate fails
  c.true_value = 1.0;
  CHECK_THROWS_AS(run_experiment(c), EstimationFailure);
}

TEST_CASE("sweeps") {
  CHECK(table_sweep({}).empty());
  const Report empty = sweep_report({});
  CHECK(empty.rows.empty());
  CHECK(empty.columns.size() == 13);

  const ExperimentConfig c = t5(2000, 20, 10);
  const auto rows = table_sweep({c});
  REQUIRE(rows.size() == 1);
  const ExperimentReport direct = run_experiment(c);
  CHECK(rows[0].report->ratio_mean == direct.ratio_mean);
  CHECK(rows[0].report->mse == direct.mse);

  ExperimentConfig bad = c;
  bad.reps = 0;
  const auto mixed = table_sweep({c, bad});
  CHECK(mixed[1].error.find("reps") != std::string::npos);
  const Report rep = sweep_report(mixed);
  CHECK(rep.rows.size() == 2);
  CHECK(rep.number(0, "mean") == direct.ratio_mean);
  CHECK(std::holds_alternative<std::monostate>(rep.rows[1][rep.column_index("mean")]));
  REQUIRE(rep.warnings.size() == 1);
  CHECK(rep.warnings[0].rfind("row 2:", 0) == 0);
}

TEST_CASE("garch true value on a degenerate process matches quadrature") {
  GarchProcess p;
  p.a0 = 1.0;
  p.a1 = 0.0;
  p.b0 = 0.0;
  p.nu = 6.0;
  const MonteCarloValue mc = garch_true_value(p, 0.95, 40, 20000, 5, 1);
  const double truth = true_deviatile(p.innovation(), 0.95);
  CHECK(std::abs(mc.value - truth) <= 3 * mc.std_error + 1e-3 * truth);
  CHECK(mc.std_error > 0.0);
  CHECK(mc.paths == 40);
  CHECK_THROWS_AS(garch_true_value(p, 0.9996, 4, 10000, 5, 1), InvalidArgument);
}

TEST_CASE("garch experiment uses the Monte-Carlo true value") {
  ExperimentConfig c;
  c.model.kind = ModelKind::garch;
  c.true_value_mode = TrueValueMode::monte_carlo;
  c.n = 2000;
  c.k = 100;
  c.tau = 0.95;
  c.reps = 5;
  c.mc_paths = 4;
  c.mc_path_length = 20000;
  c.threads = 1;
  const ExperimentReport r = run_experiment(c);
  const MonteCarloValue mc = garch_true_value(c.model.garch, 0.95, 4, 20000, c.mc_seed, 1);
  CHECK(r.true_value == mc.value);
  REQUIRE(r.true_value_se.has_value());
  CHECK(*r.true_value_se == mc.std_error);
}

TEST_CASE("student-t(5) consistency and ratio spread") {
  // k/n fixed at 1%, tau = 0.99.
  const ExperimentReport small = run_experiment(t5(1000, 10, 200));
  const ExperimentReport mid = run_experiment(t5(4000, 40, 200));
  ExperimentConfig big_cfg = t5(10000, 100, 200);
  big_cfg.keep_ratios = true;
  const ExperimentReport big = run_experiment(big_cfg);
  CHECK(small.mse > mid.mse);
  CHECK(mid.mse > big.mse);

  double mean = 0;
  for (double r : big.per_rep_ratios) mean += std::sqrt(100.0) * (r - 1);
  mean /= big.per_rep_ratios.size();
  double var = 0;
  for (double r : big.per_rep_ratios) {
    const double z = std::sqrt(100.0) * (r - 1) - mean;
    var += z * z;
  }
  var /= big.per_rep_ratios.size() - 1;
  const double v = v_gamma(0.2);
  CHECK(var >= 0.5 * v);
  CHECK(var <= 3.0 * v);
}
