// Acceptance runner: one line per criterion.
//
// Exit status: 0 when every selected criterion passes, 1 when one fails, and
// 77 when the only failures are documented deviations (registered with ctest
// as SKIP_RETURN_CODE so they show up as skipped rather than passed).

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "deviatile/asymptotics.hpp"
#include "deviatile/data_io.hpp"
#include "deviatile/estimators.hpp"
#include "deviatile/parallel.hpp"
#include "deviatile/risk_core.hpp"
#include "deviatile/simulation.hpp"

using namespace deviatile;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { detail.push_back("     " + what); }
};

struct Criterion {
  int id;
  std::string title;
  std::function<Outcome(unsigned)> run;
  // Non-empty when the criterion cannot be met as written; printed on failure.
  std::string known_deviation;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double relerr(double got, double want) { return std::abs(got / want - 1.0); }

struct Published {
  bool student;
  double alpha;
  double tau;
  double value;
};

Distribution model_of(const Published& p) {
  return p.student ? Distribution::student_t(p.alpha) : Distribution::pareto(p.alpha);
}

std::string label(const Published& p) {
  std::ostringstream o;
  o << (p.student ? "t(" : "Pareto(") << p.alpha << (p.student ? ")" : ",1)") << " tau=" << p.tau;
  return o.str();
}

Outcome check_values(const std::vector<Published>& rows) {
  Outcome o;
  for (const auto& p : rows) {
    const double v = true_deviatile(model_of(p), p.tau);
    o.check(relerr(v, p.value) <= 1e-3,
            label(p) + fmt(": %.6f vs %.4f (relerr %.1e)", v, p.value, relerr(v, p.value)));
  }
  return o;
}

Outcome c1(unsigned) {
  return check_values({{false, 3, 0.95, 2.9759}, {false, 3, 0.97, 3.6631},
                       {false, 3, 0.99, 5.6010}, {false, 5, 0.95, 0.9562},
                       {false, 5, 0.97, 1.1345}, {false, 5, 0.99, 1.5930},
                       {true, 3, 0.95, 3.9685},  {true, 3, 0.97, 4.6813},
                       {true, 3, 0.99, 6.6864},  {true, 5, 0.95, 2.5862},
                       {true, 5, 0.97, 2.9097},  {true, 5, 0.99, 3.7075}});
}

Outcome c2(unsigned) {
  return check_values({{false, 3, 0.9996, 17.8283}, {false, 5, 0.9996, 3.7609},
                       {true, 3, 0.9996, 19.3173},  {true, 5, 0.9996, 7.2585}});
}

Outcome c3(unsigned) {
  Outcome o;
  const double g = gamma_star();
  o.check(g >= 0.2130 && g <= 0.2140, fmt("gamma_star = %.8f in [0.2130, 0.2140]", g));
  const double b = beta_gamma(g);
  o.check(std::abs(b - 1.0) <= 1e-9, fmt("|beta(gamma_star) - 1| = %.2e", std::abs(b - 1.0)));
  return o;
}

Outcome c4(unsigned) {
  Outcome o;
  const int points = 50;
  for (double alpha : {2.2, 3.0}) {
    const auto d = Distribution::pareto(alpha);
    int compared = 0;
    int worse = 0;
    double last2 = 0.0;
    for (int i = 0; i < points; ++i) {
      const double tau = 0.95 + (0.999 - 0.95) * i / (points - 1);
      const double truth = true_deviatile(d, tau);
      const double r1 = first_order_deviatile(d, tau) / truth - 1;
      const double r2 = second_order_deviatile(d, tau) / truth - 1;
      if ((r1 < 0) == (r2 < 0)) {
        ++compared;
        if (std::abs(r2) > std::abs(r1)) ++worse;
      }
      last2 = r2;
    }
    std::ostringstream head;
    head << "Pareto(" << alpha << ",1): ";
    o.check(worse == 0, head.str() + fmt("second order worse at %.0f of %.0f same-sign points",
                                         worse, compared));
    o.check(std::abs(last2) < 0.01, head.str() + fmt("|relerr2(0.999)| = %.2e < 1e-2",
                                                     std::abs(last2)));
  }
  return o;
}

ExperimentConfig t5_desk(unsigned threads) {
  ExperimentConfig c;
  c.model.kind = ModelKind::student_t;
  c.model.alpha = 5.0;
  c.n = 10000;
  c.k = 100;
  c.tau = 0.99;
  c.reps = 200;
  c.threads = threads;
  return c;
}

Outcome c5(unsigned threads) {
  Outcome o;
  const ExperimentReport r = run_experiment(t5_desk(threads));
  o.check(std::abs(r.ratio_mean - 1.1734) <= 0.03,
          fmt("ratio_mean %.4f within 1.1734 +- 0.03", r.ratio_mean));
  o.check(r.mse >= 0.5 * 0.0038 && r.mse <= 2.0 * 0.0038,
          fmt("mse %.5f within [0.0019, 0.0076]", r.mse));
  o.note(fmt("published student-t(5) row: 0.9751 (sd 0.0566), mse 0.0038; here sd %.4f",
             r.ratio_sd.value_or(NAN)));
  ExperimentConfig p = t5_desk(threads);
  p.model.kind = ModelKind::pareto;
  const ExperimentReport q = run_experiment(p);
  o.note(fmt("same design under Pareto(5,1): ratio_mean %.4f, sd %.4f, mse %.4f "
             "(published 1.1734 (0.1048), 0.0410)",
             q.ratio_mean, q.ratio_sd.value_or(NAN), q.mse));
  return o;
}

Outcome c6(unsigned threads) {
  Outcome o;
  ExperimentConfig c = t5_desk(threads);
  c.p = 0.9996;
  const ExperimentReport r = run_experiment(c);
  o.check(std::abs(r.ratio_mean - 1.1202) <= 0.05,
          fmt("ratio_mean %.4f within 1.1202 +- 0.05 (sd %.4f)", r.ratio_mean,
              r.ratio_sd.value_or(NAN)));
  return o;
}

Outcome garch_check(double tau, std::size_t paths, std::size_t length, double target,
                    double tol, unsigned threads) {
  Outcome o;
  const MonteCarloValue mc = garch_true_value(GarchProcess{}, tau, paths, length, 777, threads);
  o.check(relerr(mc.value, target) <= tol,
          fmt("tau=%.4f: %.4f (se %.4f)", tau, mc.value, mc.std_error) +
              fmt(" vs %.4f, relerr %.3f", target, relerr(mc.value, target)));
  return o;
}

Outcome c7(unsigned threads) { return garch_check(0.95, 100, 100000, 5.0938, 0.10, threads); }

Outcome c7_long(unsigned threads) {
  return garch_check(0.9996, 200, 1000000, 27.7818, 0.15, threads);
}

Outcome c8(unsigned) {
  Outcome o;
  const CompanionTable t = companion_from_inputs(0.3885, 2.1774, 0.95, std::nullopt);
  const struct {
    Measure m;
    double want;
  } rows[] = {{Measure::ES, 3.5611}, {Measure::Expectile, 1.8257}, {Measure::Deviatile, 3.8673}};
  for (const auto& r : rows) {
    const double got = t.at(r.m).intermediate->point;
    o.check(std::abs(got - r.want) <= 5e-4,
            to_string(r.m) + fmt(": %.5f vs %.4f (abs diff %.1e)", got, r.want,
                                 std::abs(got - r.want)));
  }
  // gamma_hat that would reproduce the published deviatile.
  double lo = 0.3, hi = 0.45;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (beta_gamma(mid) * 2.1774 < 3.8673 ? lo : hi) = mid;
  }
  o.note(fmt("deviatile 3.8673 needs gamma_hat = %.5f", 0.5 * (lo + hi)));
  return o;
}

Outcome c9(unsigned threads) {
  Outcome o;
  const std::vector<Distribution> models = {
      Distribution::pareto(3.0), Distribution::pareto(2.2, 2.0), Distribution::pareto(5.0),
      Distribution::student_t(3.0), Distribution::student_t(6.54).scaled(0.4)};

  double worst = 0.0;
  for (const auto& d : models) {
    worst = std::max(worst, relerr(true_deviatile(d, 0.5), std::sqrt(d.variance())));
  }
  o.check(worst <= 1e-8, fmt("dev at 1/2 equals sd, max relerr %.1e", worst));

  worst = 0.0;
  for (const auto& d : models) {
    for (int i = 0; i < 20; ++i) {
      const double tau = 0.05 + 0.9499 * i / 19.0;
      const double lhs = true_deviatile(d, tau);
      worst = std::max(worst, relerr(lhs, std::sqrt(true_variantile(d, tau) / (1 - tau))));
    }
  }
  o.check(worst <= 1e-10, fmt("dev = sqrt(var/(1-tau)), max relerr %.1e", worst));

  worst = 0.0;
  bool same_at_tau = true;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto s = sample_iid(Distribution::student_t(4.0), 5000, seed);
    for (double lambda : {0.01, 3.0, 250.0}) {
      const CompanionTable a = companion_estimators(s, 0.95, 0.999, 100);
      const CompanionTable b = companion_estimators(s.scaled(lambda), 0.95, 0.999, 100);
      for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
        worst = std::max(worst, relerr(b.outcomes[i].intermediate->point,
                                       lambda * a.outcomes[i].intermediate->point));
        worst = std::max(worst, relerr(b.outcomes[i].extreme->point,
                                       lambda * a.outcomes[i].extreme->point));
      }
    }
    for (double tau : {0.9, 0.95, 0.99}) {
      same_at_tau = same_at_tau && extreme_deviatile(s, tau, tau, 100).point ==
                                       intermediate_deviatile(s, tau, 100).point;
    }
  }
  o.check(worst <= 1e-12, fmt("scale equivariance, max relerr %.1e", worst));
  o.check(same_at_tau, "extreme estimate at p = tau equals the intermediate one");

  ExperimentConfig c;
  c.model.kind = ModelKind::pareto;
  c.model.alpha = 3.0;
  c.n = 2000;
  c.k = 50;
  c.tau = 0.975;
  c.p = 0.999;
  c.reps = 16;
  c.keep_ratios = true;
  c.threads = 1;
  const auto one = run_experiment(c);
  c.threads = std::max(2u, threads);
  const auto many = run_experiment(c);
  const auto path = draw_iid(Distribution::student_t(3.0), 1500, 6);
  EstimatorSpec spec;
  spec.tau = 0.95;
  const auto bx = block_bootstrap_ci(path, spec, 30.0, 40, 0.95, 10, 1);
  const auto by = block_bootstrap_ci(path, spec, 30.0, 40, 0.95, 10, std::max(2u, threads));
  o.check(one.per_rep_ratios == many.per_rep_ratios && one.mse == many.mse &&
              bx.replicates == by.replicates,
          "seeded experiment and bootstrap identical for 1 and several threads");

  const auto dir = std::filesystem::temp_directory_path() / "deviatile_acceptance";
  std::filesystem::create_directories(dir);
  bool round_trip = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ReturnSeries s = garch_fixture(GarchProcess{}, 100, 50, seed);
    s.values[0] = 1.0 / 3.0;
    s.values[1] = -5e-324;
    const auto file = (dir / ("series" + std::to_string(seed) + ".csv")).string();
    export_series(s, file);
    CsvSchema schema;
    schema.return_column = "value";
    const ReturnSeries back = ingest_csv(file, schema, Transform::identity());
    round_trip = round_trip && back.values == s.values && back.dates == s.dates;

    Report r;
    r.add_column("date", ColumnType::text);
    r.add_column("value");
    for (std::size_t i = 0; i < s.size(); ++i) r.add_row({s.dates[i], s.values[i]});
    round_trip = round_trip && from_dsv(to_dsv(r)) == r && from_structured(to_structured(r)) == r;
  }
  std::filesystem::remove_all(dir);
  o.check(round_trip, "series and reports round-trip bit-exactly");
  return o;
}

Outcome c10(unsigned threads) {
  Outcome o;
  ExperimentConfig c;
  c.model.kind = ModelKind::pareto;
  c.model.alpha = 5.0;
  c.n = 10000;
  c.k = 100;
  c.tau = 0.99;
  c.reps = 500;
  c.keep_ratios = true;
  c.threads = threads;
  const ExperimentReport r = run_experiment(c);
  const double rk = std::sqrt(static_cast<double>(c.k));
  double mean = 0.0;
  for (double x : r.per_rep_ratios) mean += rk * (x - 1);
  mean /= r.per_rep_ratios.size();
  double var = 0.0;
  for (double x : r.per_rep_ratios) var += std::pow(rk * (x - 1) - mean, 2);
  var /= r.per_rep_ratios.size() - 1;
  const double v = v_gamma(0.2);
  o.check(var >= 0.5 * v && var <= 3.0 * v,
          fmt("var %.4f vs v(0.2) = %.4f: ratio %.2f, need [0.5, 3]", var, v, var / v));
  o.note(fmt("published Pareto(5,1) sd 0.1048 gives variance %.4f (ratio %.2f)",
             100 * 0.1048 * 0.1048, 100 * 0.1048 * 0.1048 / v));
  o.note(fmt("mean of sqrt(k)(ratio - 1) = %.3f", mean));
  return o;
}

std::vector<Criterion> criteria() {
  return {
      {1, "true values, i.i.d.", c1, ""},
      {2, "extreme true values", c2, ""},
      {3, "gamma_star root", c3, ""},
      {4, "expansion quality", c4, ""},
      {5, "desk-scale student-t(5) intermediate replication", c5,
       "target 1.1734 is the published Pareto(5,1) mean; the student-t(5) row is 0.9751 "
       "with mse 0.0038, so no single model meets both bounds"},
      {6, "desk-scale student-t(5) extreme replication", c6, ""},
      {7, "GARCH true value, 100 x 1e5 at tau = 0.95", c7, ""},
      {8, "companion formulas from published inputs", c8,
       "the published deviatile is inconsistent with the published gamma_hat at 4 decimals; "
       "ES and expectile match"},
      {9, "property suites", c9, ""},
      {10, "limiting-law variance", c10,
       "the sampling variance for Pareto(5,1) at k = 100 is far above v(0.2), as in the "
       "published table row and the remark on approximation quality"},
      {11, "GARCH true value at tau = 0.9996, 200 x 1e6 (long)", c7_long, ""},
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deviatile acceptance checks"};
  std::vector<int> selected;
  bool long_run = false;
  unsigned threads = 0;
  app.add_option("criteria", selected, "criteria to run (default 1-10)")
      ->check(CLI::Range(1, 11));
  app.add_flag("--long", long_run, "also run the long GARCH check (11)");
  app.add_option("--threads", threads, "worker threads (0: hardware)");
  CLI11_PARSE(app, argc, argv);
  if (threads == 0) threads = default_thread_count();

  if (selected.empty()) {
    for (int i = 1; i <= 10; ++i) selected.push_back(i);
    if (long_run) selected.push_back(11);
  }

  int failed = 0;
  int deviations = 0;
  for (const auto& c : criteria()) {
    if (std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(threads);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << c.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << c.title
              << fmt("  [%.1fs]", secs) << "\n";
    for (const auto& line : o.detail) std::cout << "    " << line << "\n";
    if (!o.pass) {
      if (c.known_deviation.empty()) {
        ++failed;
      } else {
        ++deviations;
        std::cout << "    known deviation: " << c.known_deviation << "\n";
      }
    }
  }
  std::cout << "summary: " << failed << " failed, " << deviations << " known deviations\n";
  if (failed > 0) return 1;
  return deviations > 0 ? 77 : 0;
}
