#include "deviatile/simulation.hpp"

#include <cmath>
#include <sstream>

#include "deviatile/error.hpp"
#include "deviatile/estimators.hpp"
#include "deviatile/parallel.hpp"
#include "deviatile/risk_core.hpp"

namespace deviatile {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::pareto: return "pareto";
    case ModelKind::student_t: return "student_t";
    case ModelKind::garch: return "garch";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "pareto") return ModelKind::pareto;
  if (s == "student_t" || s == "student-t" || s == "t") return ModelKind::student_t;
  if (s == "garch") return ModelKind::garch;
  throw InvalidArgument("unknown model '" + s + "' (expected pareto, student_t or garch)");
}

Distribution ModelSpec::distribution() const {
  switch (kind) {
    case ModelKind::pareto: return Distribution::pareto(alpha, theta);
    case ModelKind::student_t: return Distribution::student_t(alpha);
    case ModelKind::garch: break;
  }
  throw InvalidArgument("GARCH model has no closed-form distribution");
}

std::string ModelSpec::label() const {
  std::ostringstream os;
  switch (kind) {
    case ModelKind::pareto: os << "Pareto(" << alpha << "," << theta << ")"; break;
    case ModelKind::student_t: os << "t(" << alpha << ")"; break;
    case ModelKind::garch:
      os << "GARCH(" << garch.a0 << "," << garch.a1 << "," << garch.b0 << ";nu=" << garch.nu
         << ")";
      break;
  }
  return os.str();
}

void ExperimentConfig::validate() const {
  if (reps < 1) throw InvalidArgument("experiment: reps must be >= 1");
  if (n < 2) throw InvalidArgument("experiment: n must be >= 2");
  if (k < 1 || k >= n) throw InvalidArgument("experiment: k must lie in [1, n-1]");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("experiment: tau must lie in (0,1)");
  if (p && !(*p > tau && *p < 1.0)) throw InvalidArgument("experiment: p must lie in (tau, 1)");
  if (model.kind == ModelKind::garch) {
    model.garch.validate();
    if (!true_value && true_value_mode != TrueValueMode::monte_carlo) {
      throw InvalidArgument("experiment: GARCH models need the monte_carlo true-value mode");
    }
  } else {
    (void)model.distribution();
  }
}

MonteCarloValue garch_true_value(const GarchProcess& p, double tau, std::size_t paths,
                                 std::size_t path_length, std::uint64_t seed, unsigned threads) {
  p.validate();
  if (paths < 1) throw InvalidArgument("garch_true_value: need at least one path");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("garch_true_value: tau must lie in (0,1)");
  if (path_length < 2 || tau > 1.0 - 10.0 / static_cast<double>(path_length)) {
    throw InvalidArgument("garch_true_value: tau = " + std::to_string(tau) +
                          " is beyond the resolution of paths of length " +
                          std::to_string(path_length) + " (need tau <= 1 - 10/length)");
  }
  std::vector<double> dev(paths);
  parallel_for_index(paths, threads == 0 ? default_thread_count() : threads, [&](std::size_t i) {
    const GarchPath path = simulate_garch(p, path_length, seed + i);
    dev[i] = empirical_deviatile(path.sorted, tau);
  });
  long double sum = 0.0L;
  for (double d : dev) sum += d;
  const long double mean = sum / static_cast<long double>(paths);
  long double ss = 0.0L;
  for (double d : dev) ss += (d - mean) * (d - mean);
  MonteCarloValue out;
  out.value = static_cast<double>(mean);
  out.std_error = paths > 1 ? std::sqrt(static_cast<double>(ss / (paths - 1)) /
                                        static_cast<double>(paths))
                            : 0.0;
  out.paths = paths;
  out.path_length = path_length;
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const unsigned threads = cfg.threads == 0 ? default_thread_count() : cfg.threads;
  const double level = cfg.target_level();

  ExperimentReport rep;
  if (cfg.true_value) {
    rep.true_value = *cfg.true_value;
  } else if (cfg.model.kind == ModelKind::garch) {
    const MonteCarloValue mc = garch_true_value(cfg.model.garch, level, cfg.mc_paths,
                                                cfg.mc_path_length, cfg.mc_seed, threads);
    rep.true_value = mc.value;
    rep.true_value_se = mc.std_error;
  } else if (cfg.true_value_mode == TrueValueMode::monte_carlo) {
    throw InvalidArgument("experiment: monte_carlo true values are only defined for GARCH");
  } else {
    rep.true_value = true_deviatile(cfg.model.distribution(), level);
  }

  struct Outcome {
    double estimate = 0.0;
    double gamma_hat = 0.0;
    bool failed = false;
  };
  std::vector<Outcome> out(cfg.reps);
  const bool garch = cfg.model.kind == ModelKind::garch;
  const Distribution dist = garch ? Distribution::pareto(1.0) : cfg.model.distribution();
  parallel_for_index(cfg.reps, threads, [&](std::size_t r) {
    const std::uint64_t seed = cfg.base_seed + r;
    const SortedSample s = garch ? simulate_garch(cfg.model.garch, cfg.n, seed).sorted
                                 : sample_iid(dist, cfg.n, seed);
    try {
      const RiskEstimate e = cfg.p ? extreme_deviatile(s, cfg.tau, *cfg.p, cfg.k)
                                   : intermediate_deviatile(s, cfg.tau, cfg.k);
      out[r] = {e.point, e.gamma_hat, false};
    } catch (const EstimationFailure& e) {
      out[r] = {0.0, e.gamma_hat(), true};
    }
  });

  long double sum_ratio = 0.0L;
  long double sum_est = 0.0L;
  long double sum_gamma = 0.0L;
  std::vector<double> ratios;
  ratios.reserve(cfg.reps);
  for (const Outcome& o : out) {
    sum_gamma += o.gamma_hat;
    if (o.failed) {
      ++rep.failure_count;
      continue;
    }
    const double ratio = o.estimate / rep.true_value;
    ratios.push_back(ratio);
    sum_ratio += ratio;
    sum_est += o.estimate;
  }
  rep.successes = ratios.size();
  rep.gamma_hat_mean = static_cast<double>(sum_gamma / static_cast<long double>(cfg.reps));
  if (ratios.empty()) {
    throw EstimationFailure("experiment: all " + std::to_string(cfg.reps) +
                                " replicates failed (gamma_hat >= 1/2)",
                            rep.gamma_hat_mean);
  }
  const auto m = static_cast<long double>(ratios.size());
  const long double mean = sum_ratio / m;
  long double ss = 0.0L;
  long double se = 0.0L;
  for (double r : ratios) {
    ss += (r - mean) * (r - mean);
    se += (r - 1.0L) * (r - 1.0L);
  }
  rep.ratio_mean = static_cast<double>(mean);
  rep.estimate_mean = static_cast<double>(sum_est / m);
  rep.mse = static_cast<double>(se / m);
  if (ratios.size() > 1) rep.ratio_sd = std::sqrt(static_cast<double>(ss / (m - 1.0L)));
  if (cfg.keep_ratios) rep.per_rep_ratios = std::move(ratios);
  return rep;
}

std::vector<SweepRow> table_sweep(const std::vector<ExperimentConfig>& rows) {
  std::vector<SweepRow> out;
  out.reserve(rows.size());
  for (const auto& cfg : rows) {
    SweepRow row{cfg, std::nullopt, {}};
    try {
      row.report = run_experiment(cfg);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    out.push_back(std::move(row));
  }
  return out;
}

Report sweep_report(const std::vector<SweepRow>& rows) {
  Report r;
  r.add_column("model", ColumnType::text);
  r.add_column("n");
  r.add_column("alpha");
  r.add_column("k");
  r.add_column("tau");
  r.add_column("level");
  r.add_column("true");
  r.add_column("true_se");
  r.add_column("mean");
  r.add_column("sd");
  r.add_column("mse");
  r.add_column("failures");
  r.add_column("successes");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const auto& c = row.config;
    const double alpha = c.model.kind == ModelKind::garch ? c.model.garch.nu : c.model.alpha;
    std::vector<Cell> cells{c.model.label(),
                            static_cast<double>(c.n),
                            alpha,
                            static_cast<double>(c.k),
                            c.tau,
                            c.target_level()};
    if (row.report) {
      const auto& rep = *row.report;
      cells.emplace_back(rep.true_value);
      cells.emplace_back(rep.true_value_se ? Cell(*rep.true_value_se) : Cell(std::monostate{}));
      cells.emplace_back(rep.ratio_mean);
      cells.emplace_back(rep.ratio_sd ? Cell(*rep.ratio_sd) : Cell(std::monostate{}));
      cells.emplace_back(rep.mse);
      cells.emplace_back(static_cast<double>(rep.failure_count));
      cells.emplace_back(static_cast<double>(rep.successes));
      if (rep.failure_count > 0) {
        r.warnings.push_back("row " + std::to_string(i + 1) + ": " +
                             std::to_string(rep.failure_count) +
                             " replicates discarded (gamma_hat >= 1/2)");
      }
    } else {
      for (int j = 0; j < 7; ++j) cells.emplace_back(std::monostate{});
      r.warnings.push_back("row " + std::to_string(i + 1) + ": " + row.error);
    }
    r.add_row(std::move(cells));
  }
  return r;
}

}  // namespace deviatile
