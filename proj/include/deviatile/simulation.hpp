#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deviatile/distributions.hpp"
#include "deviatile/report.hpp"

namespace deviatile {

enum class ModelKind { pareto, student_t, garch };
std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct ModelSpec {
  ModelKind kind = ModelKind::pareto;
  double alpha = 3.0;   // Pareto / Student-t
  double theta = 1.0;   // Pareto scale
  GarchProcess garch;   // kind == garch

  Distribution distribution() const;  // throws for garch
  std::string label() const;
};

enum class TrueValueMode { analytic_quadrature, monte_carlo };

struct ExperimentConfig {
  ModelSpec model;
  std::size_t n = 10000;
  std::size_t k = 100;
  double tau = 0.99;
  std::optional<double> p;
  std::size_t reps = 200;
  std::uint64_t base_seed = 20240101;
  TrueValueMode true_value_mode = TrueValueMode::analytic_quadrature;
  std::size_t mc_paths = 100;
  std::size_t mc_path_length = 100000;
  std::uint64_t mc_seed = 777;
  std::optional<double> true_value;  // skips the true-value computation
  bool keep_ratios = false;
  unsigned threads = 0;  // 0: default_thread_count()

  void validate() const;
  double target_level() const { return p.value_or(tau); }
};

struct ExperimentReport {
  double true_value = 0.0;
  std::optional<double> true_value_se;  // Monte-Carlo true values only
  double ratio_mean = 0.0;
  std::optional<double> ratio_sd;       // absent for a single success
  double mse = 0.0;                     // mean (ratio - 1)^2
  std::size_t successes = 0;
  std::size_t failure_count = 0;        // reps with gamma_hat >= 1/2
  double estimate_mean = 0.0;
  double gamma_hat_mean = 0.0;          // over all reps, failed included
  std::vector<double> per_rep_ratios;   // filled when keep_ratios
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

struct MonteCarloValue {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  std::size_t path_length = 0;
};

// Mean over paths of the plug-in deviatile of each GARCH path; path i uses
// seed + i.
MonteCarloValue garch_true_value(const GarchProcess& p, double tau, std::size_t paths,
                                 std::size_t path_length, std::uint64_t seed,
                                 unsigned threads = 0);

struct SweepRow {
  ExperimentConfig config;
  std::optional<ExperimentReport> report;
  std::string error;
};

std::vector<SweepRow> table_sweep(const std::vector<ExperimentConfig>& rows);

// Columns: model, n, alpha, k, tau, level, true, true_se, mean, sd, mse,
// failures, successes. Failed rows keep their settings and leave the rest
// empty, with a warning.
Report sweep_report(const std::vector<SweepRow>& rows);

}  // namespace deviatile
