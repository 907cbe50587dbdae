#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "deviatile/data_io.hpp"
#include "deviatile/report.hpp"
#include "deviatile/risk_core.hpp"
#include "deviatile/simulation.hpp"

namespace deviatile::cli {

inline constexpr std::uint64_t kDefaultSeed = 20240101;

struct ModelOptions {
  std::string model = "pareto";
  double alpha = 3.0;
  double theta = 1.0;

  Distribution distribution() const;
};

struct ExpandOptions {
  ModelOptions model;
  double tau_min = 0.95;
  double tau_max = 0.999;
  std::size_t points = 50;
  std::vector<double> taus;  // overrides the grid when nonempty
  std::string order = "both";  // 1, 2 or both
};
// Columns: tau, true, ao1, ao2, relerr1, relerr2 (relerr = approx/true - 1).
Report cmd_expand(const ExpandOptions& o);

struct TrueValueOptions {
  ModelOptions model;
  std::vector<double> taus{0.95};
  std::vector<std::string> measures{"deviatile"};
  // GARCH Monte-Carlo mode when model == "garch".
  GarchProcess garch;
  std::size_t paths = 100;
  std::size_t path_length = 100000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
};
Report cmd_true_value(const TrueValueOptions& o);

struct SimulateOptions {
  std::string config_path;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  bool full_scale = false;
  unsigned threads = 0;
};
// Config: JSON object {"name", "reps", "base_seed", "true_value_mode",
// "mc_paths", "mc_path_length", "mc_seed", "rows": [{"model", "alpha",
// "theta", "a0", "a1", "b0", "nu", "n", "k", "tau", "p", "true_value"}]}.
// Row keys override the top-level defaults; tau defaults to 1 - k/n.
std::vector<ExperimentConfig> parse_sim_config(const std::string& json_text,
                                               const SimulateOptions& o);
Report cmd_simulate(const SimulateOptions& o);

struct DataOptions {
  std::string path;
  CsvSchema schema;
  std::string transform = "identity";
  double factor = 1.0;
  std::optional<std::string> from;  // inclusive
  std::optional<std::string> to;    // exclusive

  ReturnSeries load() const;
};

struct KRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t step = 1;
};
KRange parse_k_range(const std::string& s);  // "a:b" or "a:b:step"

struct EstimateOptions {
  DataOptions data;
  std::vector<double> levels{0.95, 0.99, 0.999};
  double base_tau = 0.95;
  std::optional<std::size_t> k;
  std::optional<KRange> k_range;
  std::size_t min_exceedances = 10;
  std::vector<std::string> measures{"VaR", "expectile", "ES", "deviatile"};
  std::string ci = "none";  // none, asymptotic, bootstrap
  double coverage = 0.95;
  std::size_t reps = 100;
  double block = 200.0;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
};
struct EstimateOutput {
  Report table;
  std::optional<Report> stability;  // only with a k range
};
EstimateOutput cmd_estimate(const EstimateOptions& o);

struct HillPlotOptions {
  std::optional<DataOptions> data;
  ModelOptions model;  // used when no data file is given
  std::size_t n = 10000;
  std::uint64_t seed = kDefaultSeed;
  std::size_t k_min = 10;
  std::size_t k_max = 0;  // 0: min(n - 1, n / 10)
};
Report cmd_hill_plot(const HillPlotOptions& o);

struct BootstrapOptions {
  DataOptions data;
  std::string measure = "deviatile";
  double tau = 0.95;
  std::optional<double> p;
  std::optional<std::size_t> k;
  std::optional<KRange> k_range;
  double block = 200.0;
  std::size_t reps = 100;
  double coverage = 0.95;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
};
Report cmd_bootstrap(const BootstrapOptions& o);

struct FixtureOptions {
  GarchProcess garch;
  std::size_t first_count = 2514;
  std::size_t second_count = 2516;
  std::uint64_t seed = kDefaultSeed;
};
ReturnSeries cmd_fixture(const FixtureOptions& o);

Measure measure_from_string(const std::string& s);

// Full command-line entry point. args[0] is the program name. Returns the
// process exit code: 0 on success (possibly with warnings), 1 on an
// operation error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace deviatile::cli
