#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "deviatile/asymptotics.hpp"
#include "deviatile/cli.hpp"
#include "deviatile/error.hpp"
#include "deviatile/estimators.hpp"
#include "deviatile/parallel.hpp"

#ifndef DEVIATILE_VERSION
#define DEVIATILE_VERSION "0.0.0"
#endif

namespace deviatile::cli {

namespace {

const Cell kMissing = std::monostate{};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

unsigned resolve_threads(unsigned t) { return t == 0 ? default_thread_count() : t; }


std::vector<std::size_t> k_values(const std::optional<KRange>& range,
                                  const std::optional<std::size_t>& k, std::size_t fallback) {
  std::vector<std::size_t> out;
  if (range) {
    for (std::size_t v = range->lo; v <= range->hi; v += range->step) out.push_back(v);
  } else {
    out.push_back(k.value_or(fallback));
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace

Measure measure_from_string(const std::string& s) {
  const std::string l = lower(s);
  if (l == "var" || l == "q" || l == "quantile") return Measure::VaR;
  if (l == "es") return Measure::ES;
  if (l == "expectile" || l == "e") return Measure::Expectile;
  if (l == "variantile") return Measure::Variantile;
  if (l == "deviatile" || l == "dev") return Measure::Deviatile;
  throw InvalidArgument("unknown measure '" + s + "'");
}

Distribution ModelOptions::distribution() const {
  const ModelKind kind = model_kind_from_string(model);
  if (kind == ModelKind::pareto) return Distribution::pareto(alpha, theta);
  if (kind == ModelKind::student_t) return Distribution::student_t(alpha);
  throw InvalidArgument("this command needs a pareto or student_t model");
}

// ------------------------------------------------------------------ expand

Report cmd_expand(const ExpandOptions& o) {
  if (o.order != "1" && o.order != "2" && o.order != "both") {
    throw InvalidArgument("--order must be 1, 2 or both");
  }
  const Distribution d = o.model.distribution();
  std::vector<double> taus = o.taus;
  if (taus.empty()) {
    if (o.points < 1) throw InvalidArgument("--points must be >= 1");
    if (!(o.tau_min > 0.0 && o.tau_max < 1.0 && o.tau_min <= o.tau_max)) {
      throw InvalidArgument("tau grid must satisfy 0 < tau-min <= tau-max < 1");
    }
    for (std::size_t i = 0; i < o.points; ++i) {
      taus.push_back(o.points == 1 ? o.tau_min
                                   : o.tau_min + (o.tau_max - o.tau_min) * static_cast<double>(i) /
                                                     static_cast<double>(o.points - 1));
    }
  }
  const bool first = o.order != "2";
  const bool second = o.order != "1";

  Report r;
  for (const char* c : {"tau", "true", "ao1", "ao2", "relerr1", "relerr2"}) r.add_column(c);
  r.set_meta("model", d.describe());
  r.set_meta("order", o.order);
  for (double tau : taus) {
    const double truth = true_deviatile(d, tau);
    Cell a1 = kMissing, a2 = kMissing, e1 = kMissing, e2 = kMissing;
    if (first) {
      const double v = first_order_deviatile(d, tau);
      a1 = v;
      e1 = v / truth - 1.0;
    }
    if (second) {
      const double v = second_order_deviatile(d, tau);
      a2 = v;
      e2 = v / truth - 1.0;
    }
    r.add_row({tau, truth, a1, a2, e1, e2});
  }
  return r;
}

// -------------------------------------------------------------- true-value

Report cmd_true_value(const TrueValueOptions& o) {
  Report r;
  r.add_column("measure", ColumnType::text);
  r.add_column("tau");
  r.add_column("value");
  r.add_column("std_error");
  r.add_column("method", ColumnType::text);
  if (model_kind_from_string(o.model.model) == ModelKind::garch) {
    r.set_meta("model", ModelSpec{ModelKind::garch, 0, 0, o.garch}.label());
    r.set_meta("paths", std::to_string(o.paths));
    r.set_meta("path_length", std::to_string(o.path_length));
    for (const auto& m : o.measures) {
      if (measure_from_string(m) != Measure::Deviatile) {
        throw InvalidArgument("GARCH true values are available for the deviatile only");
      }
    }
    for (double tau : o.taus) {
      const MonteCarloValue mc = garch_true_value(o.garch, tau, o.paths, o.path_length, o.seed,
                                                  resolve_threads(o.threads));
      r.add_row({std::string("deviatile"), tau, mc.value, mc.std_error,
                 std::string("monte_carlo")});
    }
    return r;
  }
  const Distribution d = o.model.distribution();
  r.set_meta("model", d.describe());
  for (const auto& name : o.measures) {
    const Measure m = measure_from_string(name);
    for (double tau : o.taus) {
      const RiskMeasureValue v = true_value(d, m, tau);
      r.add_row({to_string(m), tau, v.value, kMissing, to_string(v.method)});
    }
  }
  return r;
}

// ---------------------------------------------------------------- simulate

namespace {

using json = nlohmann::json;

const std::set<std::string> kTopKeys = {"name",     "description", "reps",           "base_seed",
                                        "mc_paths", "mc_seed",     "mc_path_length", "rows",
                                        "true_value_mode", "full_scale"};
const std::set<std::string> kRowKeys = {"model", "alpha", "theta", "a0",   "a1", "b0",
                                        "nu",    "burn_in", "n",   "k",    "tau", "p",
                                        "true_value", "label"};
const std::set<std::string> kFullKeys = {"reps", "mc_paths", "mc_path_length"};

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidArgument("config: " + where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw InvalidArgument("config: unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument("config: key '" + std::string(key) + "' in " + where +
                          " has the wrong type");
  }
}

std::size_t get_count(const json& obj, const char* key, std::size_t fallback,
                      const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw InvalidArgument("config: key '" + std::string(key) + "' in " + where +
                          " must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

std::vector<ExperimentConfig> parse_sim_config(const std::string& json_text,
                                               const SimulateOptions& o) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(doc, kTopKeys, "config");
  if (!doc.contains("rows") || !doc.at("rows").is_array()) {
    throw InvalidArgument("config: 'rows' array is required");
  }
  std::size_t reps = get_count(doc, "reps", 200, "config");
  std::size_t mc_paths = get_count(doc, "mc_paths", 100, "config");
  std::size_t mc_len = get_count(doc, "mc_path_length", 100000, "config");
  if (o.full_scale) {
    const json full = doc.contains("full_scale") ? doc.at("full_scale") : json::object();
    check_keys(full, kFullKeys, "full_scale");
    reps = get_count(full, "reps", 1000, "full_scale");
    mc_paths = get_count(full, "mc_paths", 1000, "full_scale");
    mc_len = get_count(full, "mc_path_length", 1000000, "full_scale");
  } else if (doc.contains("full_scale")) {
    check_keys(doc.at("full_scale"), kFullKeys, "full_scale");
  }
  if (o.reps) reps = *o.reps;
  const auto base_seed =
      o.seed.value_or(get_or<std::uint64_t>(doc, "base_seed", kDefaultSeed, "config"));
  const auto mc_seed = get_or<std::uint64_t>(doc, "mc_seed", 777, "config");
  const std::string mode = get_or<std::string>(doc, "true_value_mode", "auto", "config");
  if (mode != "auto" && mode != "analytic_quadrature" && mode != "monte_carlo") {
    throw InvalidArgument("config: true_value_mode must be analytic_quadrature or monte_carlo");
  }

  std::vector<ExperimentConfig> out;
  std::size_t idx = 0;
  for (const json& row : doc.at("rows")) {
    const std::string where = "row " + std::to_string(++idx);
    check_keys(row, kRowKeys, where);
    ExperimentConfig c;
    c.model.kind = model_kind_from_string(get_or<std::string>(row, "model", "pareto", where));
    c.model.alpha = get_or<double>(row, "alpha", 3.0, where);
    c.model.theta = get_or<double>(row, "theta", 1.0, where);
    c.model.garch.a0 = get_or<double>(row, "a0", c.model.garch.a0, where);
    c.model.garch.a1 = get_or<double>(row, "a1", c.model.garch.a1, where);
    c.model.garch.b0 = get_or<double>(row, "b0", c.model.garch.b0, where);
    c.model.garch.nu = get_or<double>(row, "nu", c.model.garch.nu, where);
    c.model.garch.burn_in = get_count(row, "burn_in", c.model.garch.burn_in, where);
    if (!row.contains("n") || !row.contains("k")) {
      throw InvalidArgument("config: " + where + " needs 'n' and 'k'");
    }
    c.n = get_count(row, "n", 0, where);
    c.k = get_count(row, "k", 0, where);
    if (c.n == 0) throw InvalidArgument("config: " + where + ": n must be positive");
    c.tau = get_or<double>(row, "tau",
                           1.0 - static_cast<double>(c.k) / static_cast<double>(c.n), where);
    if (row.contains("p")) c.p = get_or<double>(row, "p", 0.0, where);
    if (row.contains("true_value")) c.true_value = get_or<double>(row, "true_value", 0.0, where);
    c.reps = reps;
    c.base_seed = base_seed;
    c.mc_paths = mc_paths;
    c.mc_path_length = mc_len;
    c.mc_seed = mc_seed;
    c.threads = o.threads;
    c.true_value_mode = (mode == "monte_carlo" || (mode == "auto" && c.model.kind == ModelKind::garch))
                            ? TrueValueMode::monte_carlo
                            : TrueValueMode::analytic_quadrature;
    c.validate();
    out.push_back(c);
  }
  return out;
}

Report cmd_simulate(const SimulateOptions& o) {
  const std::string text = read_text_file(o.config_path);
  const auto rows = parse_sim_config(text, o);
  Report r = sweep_report(table_sweep(rows));
  const json doc = json::parse(text);
  r.set_meta("config", o.config_path);
  if (doc.contains("name")) r.set_meta("name", doc.at("name").get<std::string>());
  r.set_meta("scale", o.full_scale ? "full" : "desk");
  if (!rows.empty()) {
    r.set_meta("reps", std::to_string(rows.front().reps));
    r.set_meta("base_seed", std::to_string(rows.front().base_seed));
  }
  return r;
}

// ----------------------------------------------------------------- estimate

ReturnSeries DataOptions::load() const {
  ReturnSeries s = ingest_csv(path, schema, transform_from_string(transform, factor));
  if (from || to) {
    ReturnSeries kept;
    kept.source = s.source;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (from && s.dates[i] < *from) continue;
      if (to && !(s.dates[i] < *to)) continue;
      kept.dates.push_back(s.dates[i]);
      kept.values.push_back(s.values[i]);
    }
    if (kept.size() < 2) throw InvalidArgument("date filter leaves fewer than two observations");
    s = std::move(kept);
  }
  return s;
}

KRange parse_k_range(const std::string& s) {
  std::vector<std::size_t> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument("bad");
      parts.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw InvalidArgument("k range '" + s + "': expected positive integers a:b[:step]");
    }
  }
  if (parts.size() < 2 || parts.size() > 3 || parts[0] > parts[1]) {
    throw InvalidArgument("k range '" + s + "': expected a:b[:step] with a <= b");
  }
  return {parts[0], parts[1], parts.size() == 3 ? parts[2] : 1};
}

EstimateOutput cmd_estimate(const EstimateOptions& o) {
  if (o.ci != "none" && o.ci != "asymptotic" && o.ci != "bootstrap") {
    throw InvalidArgument("--ci must be none, asymptotic or bootstrap");
  }
  const ReturnSeries series = o.data.load();
  const SortedSample s = series.sorted();
  const std::size_t n = s.size();
  std::vector<Measure> measures;
  for (const auto& m : o.measures) {
    const Measure mm = measure_from_string(m);
    if (mm == Measure::Variantile) throw InvalidArgument("no tail estimator for the variantile");
    measures.push_back(mm);
  }
  const auto ks = k_values(o.k_range, o.k, exceedance_count(n, o.base_tau));
  const bool with_ci = o.ci != "none";

  Report r;
  r.add_column("k");
  r.add_column("tau");
  r.add_column("path", ColumnType::text);
  r.add_column("base_tau");
  r.add_column("gamma_hat");
  for (Measure m : measures) r.add_column(to_string(m));
  if (with_ci) {
    for (Measure m : measures) {
      r.add_column(to_string(m) + "_lo");
      r.add_column(to_string(m) + "_hi");
    }
  }
  r.set_meta("data", o.data.path);
  r.set_meta("n", std::to_string(n));
  r.set_meta("transform", o.data.transform);
  r.set_meta("factor", format_number(o.data.factor));
  r.set_meta("base_tau", format_number(o.base_tau));
  r.set_meta("min_exceedances", std::to_string(o.min_exceedances));
  r.set_meta("ci", o.ci);
  if (with_ci) r.set_meta("coverage", format_number(o.coverage));
  if (o.ci == "bootstrap") {
    r.set_meta("seed", std::to_string(o.seed));
    r.set_meta("reps", std::to_string(o.reps));
    r.set_meta("mean_block", format_number(o.block));
  }
  bool warned_asymptotic = false;

  // values[level index][measure index] -> per-k points for the summary
  std::vector<std::vector<std::vector<double>>> values(
      o.levels.size(), std::vector<std::vector<double>>(measures.size()));

  for (std::size_t k : ks) {
    const TailFit fit = hill(s, k);
    for (std::size_t li = 0; li < o.levels.size(); ++li) {
      const double level = o.levels[li];
      const bool intermediate = exceedance_count(n, level) >= o.min_exceedances;
      if (!intermediate && level < o.base_tau) {
        throw InvalidArgument("level " + format_number(level) +
                              " has too few exceedances and lies below the base level");
      }
      const double tau_used = intermediate ? level : o.base_tau;
      const std::optional<double> p =
          intermediate ? std::nullopt : std::optional<double>(level);
      const CompanionTable table =
          companion_from_inputs(fit.gamma_hat, intermediate_quantile(s, tau_used), tau_used, p, k);

      std::vector<Cell> row{static_cast<double>(k), level,
                            std::string(intermediate ? "intermediate" : "extreme"),
                            intermediate ? kMissing : Cell(o.base_tau), fit.gamma_hat};
      std::vector<Cell> ci_cells;
      for (std::size_t mi = 0; mi < measures.size(); ++mi) {
        const Measure m = measures[mi];
        const MeasureOutcome& out = table.at(m);
        const std::optional<RiskEstimate>& est = intermediate ? out.intermediate : out.extreme;
        if (!est) {
          row.push_back(kMissing);
          r.warnings.push_back("k=" + std::to_string(k) + " tau=" + format_number(level) + " " +
                               to_string(m) + ": " + out.error);
          if (with_ci) {
            ci_cells.push_back(kMissing);
            ci_cells.push_back(kMissing);
          }
          continue;
        }
        row.push_back(est->point);
        values[li][mi].push_back(est->point);
        if (!with_ci) continue;
        std::optional<RiskEstimate> ci;
        if (o.ci == "asymptotic") {
          if (m == Measure::Deviatile) {
            ci = asymptotic_ci(*est, fit, -1.0, o.coverage).estimate;
          } else if (!warned_asymptotic) {
            r.warnings.push_back("asymptotic intervals are only defined for the deviatile");
            warned_asymptotic = true;
          }
        } else {
          EstimatorSpec spec{m, tau_used, p, k};
          try {
            ci = block_bootstrap_ci(series.values, spec, o.block, o.reps, o.coverage, o.seed,
                                    resolve_threads(o.threads))
                     .estimate;
          } catch (const EstimationFailure& e) {
            r.warnings.push_back("k=" + std::to_string(k) + " tau=" + format_number(level) +
                                 " " + to_string(m) + ": " + e.what());
          }
        }
        ci_cells.push_back(ci && ci->ci_low ? Cell(*ci->ci_low) : kMissing);
        ci_cells.push_back(ci && ci->ci_high ? Cell(*ci->ci_high) : kMissing);
      }
      row.insert(row.end(), ci_cells.begin(), ci_cells.end());
      r.add_row(std::move(row));
    }
  }

  EstimateOutput result{std::move(r), std::nullopt};
  if (o.k_range) {
    Report st;
    st.add_column("tau");
    st.add_column("measure", ColumnType::text);
    st.add_column("k_count");
    st.add_column("median");
    st.add_column("min");
    st.add_column("max");
    st.add_column("max_rel_dev");
    st.set_meta("k_range", std::to_string(o.k_range->lo) + ":" + std::to_string(o.k_range->hi) +
                               ":" + std::to_string(o.k_range->step));
    for (std::size_t li = 0; li < o.levels.size(); ++li) {
      for (std::size_t mi = 0; mi < measures.size(); ++mi) {
        const auto& v = values[li][mi];
        if (v.empty()) {
          st.add_row({o.levels[li], to_string(measures[mi]), 0.0, kMissing, kMissing, kMissing,
                      kMissing});
          continue;
        }
        const double med = median(v);
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        double dev = 0.0;
        for (double x : v) dev = std::max(dev, std::abs(x / med - 1.0));
        st.add_row({o.levels[li], to_string(measures[mi]), static_cast<double>(v.size()), med, *lo,
                    *hi, dev});
      }
    }
    result.stability = std::move(st);
  }
  return result;
}

// ---------------------------------------------------------------- hill-plot

Report cmd_hill_plot(const HillPlotOptions& o) {
  Report r;
  SortedSample s;
  if (o.data) {
    s = o.data->load().sorted();
    r.set_meta("data", o.data->path);
  } else {
    const Distribution d = o.model.distribution();
    s = sample_iid(d, o.n, o.seed);
    r.set_meta("model", d.describe());
    r.set_meta("seed", std::to_string(o.seed));
  }
  const std::size_t n = s.size();
  const std::size_t k_max = o.k_max == 0 ? std::min(n - 1, std::max<std::size_t>(n / 10, 1))
                                         : o.k_max;
  if (k_max > n - 1) {
    throw InvalidArgument("k range exceeds n - 1 = " + std::to_string(n - 1));
  }
  r.set_meta("n", std::to_string(n));
  r.add_column("k");
  r.add_column("gamma_hat");
  for (const auto& [k, g] : hill_curve(s, o.k_min, k_max)) {
    r.add_row({static_cast<double>(k), g});
  }
  return r;
}

// ---------------------------------------------------------------- bootstrap

Report cmd_bootstrap(const BootstrapOptions& o) {
  const ReturnSeries series = o.data.load();
  const std::size_t n = series.size();
  const Measure m = measure_from_string(o.measure);
  const auto ks = k_values(o.k_range, o.k, exceedance_count(n, o.tau));

  Report r;
  r.set_meta("data", o.data.path);
  r.set_meta("n", std::to_string(n));
  r.set_meta("measure", to_string(m));
  r.set_meta("seed", std::to_string(o.seed));
  r.set_meta("reps", std::to_string(o.reps));
  r.set_meta("mean_block", format_number(o.block));
  r.set_meta("coverage", format_number(o.coverage));
  r.add_column("k");
  r.add_column("tau");
  r.add_column("level");
  r.add_column("gamma_hat");
  r.add_column("point");
  r.add_column("sd");
  r.add_column("ci_low");
  r.add_column("ci_high");
  r.add_column("replicates");
  r.add_column("discarded");
  r.add_column("ci_method", ColumnType::text);
  for (std::size_t k : ks) {
    EstimatorSpec spec{m, o.tau, o.p, k};
    try {
      const BootstrapResult b = block_bootstrap_ci(series.values, spec, o.block, o.reps,
                                                   o.coverage, o.seed, resolve_threads(o.threads));
      const RiskEstimate& e = b.estimate;
      r.add_row({static_cast<double>(k), o.tau, e.level, e.gamma_hat, e.point,
                 e.ci_method == CiMethod::none ? kMissing : Cell(b.sd),
                 e.ci_low ? Cell(*e.ci_low) : kMissing, e.ci_high ? Cell(*e.ci_high) : kMissing,
                 static_cast<double>(b.replicates.size()), static_cast<double>(b.discarded),
                 to_string(e.ci_method)});
    } catch (const EstimationFailure& e) {
      r.warnings.push_back("k=" + std::to_string(k) + ": " + e.what());
      r.add_row({static_cast<double>(k), o.tau, o.p.value_or(o.tau), kMissing, kMissing, kMissing,
                 kMissing, kMissing, kMissing, kMissing, std::string("failed")});
    }
  }
  return r;
}

// ------------------------------------------------------------------ fixture

ReturnSeries cmd_fixture(const FixtureOptions& o) {
  o.garch.validate();
  return garch_fixture(o.garch, o.first_count, o.second_count, o.seed);
}

// ---------------------------------------------------------------------- run

namespace {

std::string shell_quote(const std::string& a) {
  if (!a.empty() && a.find_first_of(" \t\"'\\$`*?;&|<>(){}[]#") == std::string::npos) return a;
  std::string out = "'";
  for (char c : a) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string command_line(const std::vector<std::string>& args) {
  std::string out = "deviatile";
  for (std::size_t i = 1; i < args.size(); ++i) out += " " + shell_quote(args[i]);
  return out;
}

struct OutputOptions {
  std::string path = "-";
  std::string format;  // empty: from the extension
};

void add_output(CLI::App* sub, OutputOptions& out) {
  sub->add_option("-o,--out", out.path, "Output file ('-' for stdout)");
  sub->add_option("--format", out.format, "dsv or structured (default: from the extension)")
      ->check(CLI::IsMember({"dsv", "csv", "structured", "json"}));
}

void add_model(CLI::App* sub, ModelOptions& m, bool allow_garch = false) {
  std::vector<std::string> kinds{"pareto", "student_t", "t"};
  if (allow_garch) kinds.push_back("garch");
  sub->add_option("--model", m.model, "Model family")->check(CLI::IsMember(kinds));
  sub->add_option("--alpha", m.alpha, "Tail exponent / degrees of freedom");
  sub->add_option("--theta", m.theta, "Pareto scale");
}

void add_garch(CLI::App* sub, GarchProcess& g) {
  sub->add_option("--a0", g.a0, "GARCH intercept");
  sub->add_option("--a1", g.a1, "GARCH ARCH coefficient");
  sub->add_option("--b0", g.b0, "GARCH GARCH coefficient");
  sub->add_option("--nu", g.nu, "Innovation degrees of freedom");
  sub->add_option("--burn-in", g.burn_in, "Discarded initial steps");
}

struct DataFlags {
  std::string price_col;
  std::string return_col;
  std::string delimiter = ",";
  std::string from;
  std::string to;
};

void add_data(CLI::App* sub, DataOptions& d, DataFlags& f, bool required) {
  auto* opt = sub->add_option("--data", d.path, "CSV file with a header row");
  if (required) opt->required();
  sub->add_option("--date-col", d.schema.date_column, "Date column name");
  sub->add_option("--price-col", f.price_col, "Price column (neg_log_return)");
  sub->add_option("--return-col", f.return_col, "Value column (identity/scale)");
  sub->add_option("--delimiter", f.delimiter, "Field delimiter");
  sub->add_option("--transform", d.transform, "neg_log_return, identity or scale")
      ->check(CLI::IsMember({"neg_log_return", "identity", "scale"}));
  sub->add_option("--factor", d.factor, "Multiplier, e.g. 100 for percent");
  sub->add_option("--from", f.from, "First date kept (inclusive)");
  sub->add_option("--to", f.to, "Dates kept strictly before this one");
}

void finish_data(DataOptions& d, const DataFlags& f) {
  if (f.delimiter.size() != 1) throw InvalidArgument("--delimiter must be a single character");
  d.schema.delimiter = f.delimiter[0];
  if (!f.price_col.empty()) d.schema.price_column = f.price_col;
  if (!f.return_col.empty()) d.schema.return_column = f.return_col;
  if (!d.schema.price_column && !d.schema.return_column) {
    if (d.transform == "neg_log_return") {
      d.schema.price_column = "price";
    } else {
      d.schema.return_column = "value";
    }
  }
  if (!f.from.empty()) d.from = f.from;
  if (!f.to.empty()) d.to = f.to;
}

void stamp(Report& r, const std::string& command, const std::string& sub,
           std::optional<std::uint64_t> seed) {
  std::vector<std::pair<std::string, std::string>> head{
      {"command", command},
      {"subcommand", sub},
      {"seed", seed ? std::to_string(*seed) : "none"},
      {"version", DEVIATILE_VERSION}};
  for (auto& kv : r.metadata) {
    if (kv.first != "seed") head.push_back(std::move(kv));
  }
  r.metadata = std::move(head);
}

std::string render(const Report& r, const OutputOptions& out) {
  const ReportFormat f =
      out.format.empty() ? report_format_for_path(out.path) : report_format_from_string(out.format);
  return f == ReportFormat::structured ? to_structured(r) : to_dsv(r);
}

void emit(const std::string& text, const std::string& path, std::ostream& os) {
  if (path.empty() || path == "-") {
    os << text;
  } else {
    write_text_file(path, text);
  }
}

std::string sibling_path(const std::string& path, const std::string& tag) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.rfind('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

void report_warnings(const Report& r, std::ostream& err) {
  for (const auto& w : r.warnings) err << "warning: " << w << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deviatile risk measure toolkit", "deviatile"};
  app.set_version_flag("--version", DEVIATILE_VERSION);
  app.require_subcommand(1);
  const std::string cmdline = command_line(args);

  OutputOptions output;
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: DEVIATILE_THREADS or all cores)");

  ExpandOptions ex;
  auto* s_expand = app.add_subcommand("expand", "First/second-order expansions vs exact values");
  add_model(s_expand, ex.model);
  s_expand->add_option("--tau-min", ex.tau_min, "Grid start");
  s_expand->add_option("--tau-max", ex.tau_max, "Grid end");
  s_expand->add_option("--points", ex.points, "Grid size");
  s_expand->add_option("--tau", ex.taus, "Explicit levels (overrides the grid)")->delimiter(',');
  s_expand->add_option("--order", ex.order, "1, 2 or both");
  add_output(s_expand, output);

  TrueValueOptions tv;
  auto* s_true = app.add_subcommand("true-value", "Exact risk measures of a model");
  add_model(s_true, tv.model, true);
  add_garch(s_true, tv.garch);
  s_true->add_option("--tau", tv.taus, "Levels")->delimiter(',');
  s_true->add_option("--measure", tv.measures, "VaR, ES, expectile, variantile, deviatile")
      ->delimiter(',');
  s_true->add_option("--paths", tv.paths, "GARCH Monte-Carlo paths");
  s_true->add_option("--path-length", tv.path_length, "GARCH Monte-Carlo path length");
  s_true->add_option("--seed", tv.seed, "Seed for GARCH paths");
  add_output(s_true, output);

  SimulateOptions sim;
  std::size_t sim_reps = 0;
  std::uint64_t sim_seed = 0;
  auto* s_sim = app.add_subcommand("simulate", "Monte-Carlo tables from a JSON config");
  s_sim->add_option("--config", sim.config_path, "Config file")->required();
  auto* o_reps = s_sim->add_option("--reps", sim_reps, "Override the replication count");
  auto* o_seed = s_sim->add_option("--seed", sim_seed, "Override the base seed");
  s_sim->add_flag("--full-scale", sim.full_scale, "Use the full_scale replication counts from the config");
  add_output(s_sim, output);

  EstimateOptions est;
  DataFlags est_data;
  std::string est_k_range;
  std::size_t est_k = 0;
  auto* s_est = app.add_subcommand("estimate", "VaR/ES/expectile/deviatile estimates from data");
  add_data(s_est, est.data, est_data, true);
  s_est->add_option("--levels", est.levels, "Target levels")->delimiter(',');
  s_est->add_option("--base-tau", est.base_tau, "Extrapolation base level");
  auto* o_est_k = s_est->add_option("--k", est_k, "Hill threshold");
  s_est->add_option("--k-range", est_k_range, "a:b[:step], one table per k")->excludes(o_est_k);
  s_est->add_option("--min-exceedances", est.min_exceedances,
                    "Levels with fewer exceedances use extrapolation");
  s_est->add_option("--measures", est.measures, "Subset of VaR,expectile,ES,deviatile")
      ->delimiter(',');
  s_est->add_option("--ci", est.ci, "none, asymptotic or bootstrap")
      ->check(CLI::IsMember({"none", "asymptotic", "bootstrap"}));
  s_est->add_option("--coverage", est.coverage, "Interval coverage");
  s_est->add_option("--reps", est.reps, "Bootstrap replicates");
  s_est->add_option("--block", est.block, "Mean bootstrap block length");
  s_est->add_option("--seed", est.seed, "Bootstrap seed");
  add_output(s_est, output);

  HillPlotOptions hp;
  DataOptions hp_data;
  DataFlags hp_flags;
  auto* s_hill = app.add_subcommand("hill-plot", "Hill estimates over a range of k");
  add_data(s_hill, hp_data, hp_flags, false);
  add_model(s_hill, hp.model);
  s_hill->add_option("--n", hp.n, "Sample size for a model sample");
  s_hill->add_option("--seed", hp.seed, "Seed for a model sample");
  s_hill->add_option("--k-min", hp.k_min, "Smallest k");
  s_hill->add_option("--k-max", hp.k_max, "Largest k (default n/10)");
  add_output(s_hill, output);

  BootstrapOptions bs;
  DataFlags bs_data;
  std::string bs_k_range;
  std::size_t bs_k = 0;
  double bs_p = 0.0;
  auto* s_boot = app.add_subcommand("bootstrap", "Stationary block bootstrap intervals");
  add_data(s_boot, bs.data, bs_data, true);
  s_boot->add_option("--measure", bs.measure, "VaR, ES, expectile or deviatile");
  s_boot->add_option("--tau", bs.tau, "Intermediate level");
  auto* o_bs_p = s_boot->add_option("--p", bs_p, "Extreme level (extrapolated from tau)");
  auto* o_bs_k = s_boot->add_option("--k", bs_k, "Hill threshold");
  s_boot->add_option("--k-range", bs_k_range, "a:b[:step]")->excludes(o_bs_k);
  s_boot->add_option("--block", bs.block, "Mean block length");
  s_boot->add_option("--reps", bs.reps, "Bootstrap replicates");
  s_boot->add_option("--coverage", bs.coverage, "Interval coverage");
  s_boot->add_option("--seed", bs.seed, "Seed");
  add_output(s_boot, output);

  FixtureOptions fx;
  auto* s_fix = app.add_subcommand("fixture", "Write the synthetic GARCH log-loss fixture");
  add_garch(s_fix, fx.garch);
  s_fix->add_option("--first", fx.first_count, "Observations dated 2000-2009");
  s_fix->add_option("--second", fx.second_count, "Observations dated 2010-2019");
  s_fix->add_option("--seed", fx.seed, "Seed");
  s_fix->add_option("-o,--out", output.path, "Output CSV ('-' for stdout)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    Report report;
    std::optional<std::uint64_t> seed;
    std::string sub;
    if (s_expand->parsed()) {
      sub = "expand";
      report = cmd_expand(ex);
    } else if (s_true->parsed()) {
      sub = "true-value";
      tv.threads = threads;
      if (model_kind_from_string(tv.model.model) == ModelKind::garch) seed = tv.seed;
      report = cmd_true_value(tv);
    } else if (s_sim->parsed()) {
      sub = "simulate";
      if (*o_reps) sim.reps = sim_reps;
      if (*o_seed) sim.seed = sim_seed;
      sim.threads = threads;
      report = cmd_simulate(sim);
      if (const std::string* bs_seed = report.meta("base_seed")) seed = std::stoull(*bs_seed);
    } else if (s_est->parsed()) {
      sub = "estimate";
      finish_data(est.data, est_data);
      if (*o_est_k) est.k = est_k;
      if (!est_k_range.empty()) est.k_range = parse_k_range(est_k_range);
      est.threads = threads;
      if (est.ci == "bootstrap") seed = est.seed;
      EstimateOutput result = cmd_estimate(est);
      stamp(result.table, cmdline, sub, seed);
      report_warnings(result.table, err);
      emit(render(result.table, output), output.path, out);
      if (result.stability) {
        stamp(*result.stability, cmdline, sub, seed);
        if (output.path.empty() || output.path == "-") {
          out << '\n';
          emit(render(*result.stability, output), output.path, out);
        } else {
          emit(render(*result.stability, output), sibling_path(output.path, ".stability"), out);
        }
      }
      return 0;
    } else if (s_hill->parsed()) {
      sub = "hill-plot";
      if (!hp_data.path.empty()) {
        finish_data(hp_data, hp_flags);
        hp.data = hp_data;
      } else {
        seed = hp.seed;
      }
      report = cmd_hill_plot(hp);
    } else if (s_boot->parsed()) {
      sub = "bootstrap";
      finish_data(bs.data, bs_data);
      if (*o_bs_p) bs.p = bs_p;
      if (*o_bs_k) bs.k = bs_k;
      if (!bs_k_range.empty()) bs.k_range = parse_k_range(bs_k_range);
      bs.threads = threads;
      seed = bs.seed;
      report = cmd_bootstrap(bs);
    } else if (s_fix->parsed()) {
      const ReturnSeries series = cmd_fixture(fx);
      std::string text = "# " + std::string(kReportSchema) + " fixture\n";
      text += "# command: " + cmdline + "\n";
      text += "# seed: " + std::to_string(fx.seed) + "\n";
      text += "# version: " + std::string(DEVIATILE_VERSION) + "\n";
      text += "# garch: " + ModelSpec{ModelKind::garch, 0, 0, fx.garch}.label() + "\n";
      text += series_to_csv(series);
      emit(text, output.path, out);
      return 0;
    }
    stamp(report, cmdline, sub, seed);
    report_warnings(report, err);
    emit(render(report, output), output.path, out);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace deviatile::cli
