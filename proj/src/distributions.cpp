#include "deviatile/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "deviatile/error.hpp"
#include "deviatile/numerics.hpp"

namespace deviatile {

namespace {

void check_level(double tau, const char* who) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw InvalidArgument(std::string(who) + ": level must lie strictly inside (0,1)");
  }
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

// ---------------------------------------------------------------- Pareto

ParetoModel::ParetoModel(double alpha, double theta) : alpha_(alpha), theta_(theta) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("Pareto: alpha must be > 0");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidArgument("Pareto: theta must be > 0");
}

double ParetoModel::survival(double x) const {
  if (x <= 0.0) return 1.0;
  return std::exp(-alpha_ * std::log1p(x / theta_));
}

double ParetoModel::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return -std::expm1(-alpha_ * std::log1p(x / theta_));
}

double ParetoModel::pdf(double x) const {
  if (x < 0.0) return 0.0;
  return alpha_ / theta_ * std::exp(-(alpha_ + 1.0) * std::log1p(x / theta_));
}

double ParetoModel::upper_quantile(double s) const {
  check_level(s, "Pareto upper_quantile");
  return theta_ * std::expm1(-std::log(s) / alpha_);
}

double ParetoModel::quantile(double tau) const {
  check_level(tau, "Pareto quantile");
  return theta_ * std::expm1(-std::log1p(-tau) / alpha_);
}

double ParetoModel::mean() const {
  if (alpha_ <= 1.0) return std::numeric_limits<double>::infinity();
  return theta_ / (alpha_ - 1.0);
}

double ParetoModel::variance() const {
  if (alpha_ <= 2.0) return std::numeric_limits<double>::infinity();
  return alpha_ * theta_ * theta_ / ((alpha_ - 1.0) * (alpha_ - 1.0) * (alpha_ - 2.0));
}

TwoRVMeta ParetoModel::tail() const {
  const double g = 1.0 / alpha_;
  return {g, -g, [g](double t) { return g * std::pow(t, -g); }};
}

double pareto_quantile(const ParetoModel& m, double tau) { return m.quantile(tau); }

// ---------------------------------------------------------------- Student-t

StudentTModel::StudentTModel(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("Student-t: degrees of freedom must be > 0");
  }
  log_beta_ = numerics::log_beta(0.5 * alpha_, 0.5);
  // Gamma((a+1)/2) / (sqrt(a pi) Gamma(a/2)) = 1 / (sqrt(a) B(a/2, 1/2))
  log_norm_ = -0.5 * std::log(alpha_) - log_beta_;
}

double StudentTModel::survival(double x) const {
  if (x < 0.0) return 1.0 - survival(-x);
  if (x == 0.0) return 0.5;
  if (std::isinf(x)) return 0.0;
  const double x2 = x * x;
  if (x2 < alpha_) {
    const double w = x2 / (alpha_ + x2);
    return 0.5 * (1.0 - numerics::incomplete_beta(0.5, 0.5 * alpha_, w, log_beta_));
  }
  const double y = alpha_ / (alpha_ + x2);
  return 0.5 * numerics::incomplete_beta(0.5 * alpha_, 0.5, y, log_beta_);
}

double StudentTModel::cdf(double x) const {
  if (x < 0.0) return survival(-x);
  return 1.0 - survival(x);
}

double StudentTModel::pdf(double x) const {
  return std::exp(log_norm_ - 0.5 * (alpha_ + 1.0) * std::log1p(x * x / alpha_));
}

double StudentTModel::upper_quantile(double s) const {
  check_level(s, "Student-t upper_quantile");
  if (s == 0.5) return 0.0;
  if (s > 0.5) return -upper_quantile(1.0 - s);

  // f(x) <= norm alpha^((alpha+1)/2) x^-(alpha+1), hence
  // survival(x) <= C x^-alpha with C = norm alpha^((alpha-1)/2) and
  // (C/s)^(1/alpha) brackets the root from above.
  const double log_c = log_norm_ + 0.5 * (alpha_ - 1.0) * std::log(alpha_);
  double hi = std::exp((log_c - std::log(s)) / alpha_);
  if (!std::isfinite(hi)) hi = std::numeric_limits<double>::max();
  double lo = 0.0;
  while (survival(hi) > s) {
    lo = hi;
    hi *= 2.0;
  }

  const double log_s = std::log(s);
  const double z = numerics::normal_quantile(1.0 - s);
  double x = z + (z * z * z + z) / (4.0 * alpha_);
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

  for (int iter = 0; iter < 200; ++iter) {
    const double sv = survival(x);
    if (sv > s) {
      lo = x;
    } else {
      hi = x;
    }
    const double phi = std::log(sv) - log_s;
    // Newton in log x: d log S / d log x = -x f(x) / S(x)
    const double slope = -x * pdf(x) / sv;
    double next = x * std::exp(-phi / slope);
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      return next;
    }
    x = next;
  }
  throw ConvergenceError("Student-t quantile: root finder did not converge");
}

double StudentTModel::quantile(double tau) const {
  check_level(tau, "Student-t quantile");
  return upper_quantile(1.0 - tau);
}

double StudentTModel::mean() const {
  return alpha_ > 1.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
}

double StudentTModel::variance() const {
  if (alpha_ <= 2.0) return std::numeric_limits<double>::infinity();
  return alpha_ / (alpha_ - 2.0);
}

double StudentTModel::c_alpha() const {
  return 2.0 * std::exp(log_norm_ + 0.5 * (alpha_ - 1.0) * std::log(alpha_));
}

TwoRVMeta StudentTModel::tail() const {
  const double a = alpha_;
  const double c = c_alpha();
  return {1.0 / a, -2.0 / a,
          [a, c](double t) { return (a + 1.0) / (a + 2.0) * std::pow(c * t, -2.0 / a); }};
}

double student_t_quantile(const StudentTModel& m, double tau) { return m.quantile(tau); }

// ---------------------------------------------------------------- Distribution

Distribution Distribution::pareto(double alpha, double theta) {
  return Distribution(ParetoModel(alpha, theta));
}

Distribution Distribution::student_t(double alpha) { return Distribution(StudentTModel(alpha)); }

Distribution::Distribution(Shape shape, double location, double scale)
    : shape_(std::move(shape)), location_(location), scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("scale must be > 0");
  if (!std::isfinite(location)) throw InvalidArgument("location must be finite");
}

Distribution Distribution::shifted(double c) const {
  return Distribution(shape_, location_ + c, scale_);
}

Distribution Distribution::scaled(double lambda) const {
  if (!(lambda > 0.0)) throw InvalidArgument("scale factor must be > 0");
  return Distribution(shape_, location_ * lambda, scale_ * lambda);
}

double Distribution::cdf(double x) const {
  const double z = (x - location_) / scale_;
  return std::visit([z](const auto& m) { return m.cdf(z); }, shape_);
}

double Distribution::survival(double x) const {
  const double z = (x - location_) / scale_;
  return std::visit([z](const auto& m) { return m.survival(z); }, shape_);
}

double Distribution::pdf(double x) const {
  const double z = (x - location_) / scale_;
  return std::visit([z](const auto& m) { return m.pdf(z); }, shape_) / scale_;
}

double Distribution::quantile(double tau) const {
  check_level(tau, "quantile");
  const double z = tau < 0.5
                       ? std::visit([tau](const auto& m) { return m.quantile(tau); }, shape_)
                       : std::visit([tau](const auto& m) { return m.upper_quantile(1.0 - tau); },
                                    shape_);
  return location_ + scale_ * z;
}

double Distribution::upper_quantile(double s) const {
  check_level(s, "upper_quantile");
  return location_ + scale_ * std::visit([s](const auto& m) { return m.upper_quantile(s); }, shape_);
}

double Distribution::mean() const {
  return location_ + scale_ * std::visit([](const auto& m) { return m.mean(); }, shape_);
}

double Distribution::variance() const {
  return scale_ * scale_ * std::visit([](const auto& m) { return m.variance(); }, shape_);
}

double Distribution::support_lower() const {
  return std::visit(overloaded{[this](const ParetoModel&) { return location_; },
                               [](const StudentTModel&) {
                                 return -std::numeric_limits<double>::infinity();
                               }},
                    shape_);
}

double Distribution::tail_index() const {
  return std::visit([](const auto& m) { return 1.0 / m.alpha(); }, shape_);
}

TwoRVMeta Distribution::tail() const {
  return std::visit(
      overloaded{
          [this](const ParetoModel& m) {
            // U(t) = c + s theta (t^g - 1) = s theta t^g (1 + D t^-g),
            // D = c/(s theta) - 1, A(t) = -g D t^-g.
            const double g = 1.0 / m.alpha();
            const double d = location_ / (scale_ * m.theta()) - 1.0;
            return TwoRVMeta{g, -g, [g, d](double t) { return -g * d * std::pow(t, -g); }};
          },
          [this](const StudentTModel& m) {
            if (location_ != 0.0) {
              throw InvalidArgument(
                  "second-order tail metadata of a shifted Student-t is not available");
            }
            return m.tail();
          }},
      shape_);
}

std::string Distribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{[&](const ParetoModel& m) {
                          os << "Pareto(alpha=" << m.alpha() << ",theta=" << m.theta() << ")";
                        },
                        [&](const StudentTModel& m) { os << "StudentT(alpha=" << m.alpha() << ")"; }},
             shape_);
  if (location_ != 0.0 || scale_ != 1.0) {
    os << "*" << scale_ << "+" << location_;
  }
  return os.str();
}

// ---------------------------------------------------------------- samples

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::iid: return "iid";
    case Provenance::garch: return "garch";
    case Provenance::file: return "file";
    case Provenance::bootstrap: return "bootstrap";
    case Provenance::literal: return "literal";
  }
  return "unknown";
}

SortedSample SortedSample::from_unsorted(std::vector<double> values, Provenance p) {
  std::sort(values.begin(), values.end());
  return SortedSample(std::move(values), p);
}

SortedSample SortedSample::from_sorted(std::vector<double> values, Provenance p) {
  if (!std::is_sorted(values.begin(), values.end())) {
    throw InvalidArgument("SortedSample::from_sorted: values are not ascending");
  }
  return SortedSample(std::move(values), p);
}

SortedSample SortedSample::scaled(double lambda) const {
  if (!(lambda > 0.0)) throw InvalidArgument("scale factor must be > 0");
  std::vector<double> v(values_.begin(), values_.end());
  for (double& x : v) x *= lambda;
  return SortedSample(std::move(v), provenance_);
}

UniformStream::UniformStream(std::uint64_t seed) : engine_(seed) {}

std::uint64_t UniformStream::next_u64() { return engine_(); }

double UniformStream::next() {
  // Midpoints of a 2^-53 grid: never 0, never 1.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<double> draw_iid(const Distribution& d, std::size_t n, std::uint64_t seed) {
  UniformStream u(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = d.quantile(u.next());
  return out;
}

SortedSample sample_iid(const Distribution& d, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample_iid: n must be >= 1");
  return SortedSample::from_unsorted(draw_iid(d, n, seed), Provenance::iid);
}

// ---------------------------------------------------------------- GARCH

void GarchProcess::validate() const {
  if (!(a0 > 0.0)) throw InvalidArgument("GARCH: a0 must be > 0");
  if (!(a1 >= 0.0) || !(b0 >= 0.0)) throw InvalidArgument("GARCH: a1, b0 must be >= 0");
  if (!(a1 + b0 < 1.0)) throw InvalidArgument("GARCH: a1 + b0 must be < 1 for stationarity");
  if (!(nu > 2.0)) throw InvalidArgument("GARCH: innovation degrees of freedom must be > 2");
}

Distribution GarchProcess::innovation() const {
  return Distribution::student_t(nu).scaled(std::sqrt((nu - 2.0) / nu));
}

GarchPath simulate_garch(const GarchProcess& p, std::size_t n, std::uint64_t seed) {
  p.validate();
  if (n < 1) throw InvalidArgument("simulate_garch: n must be >= 1");
  const Distribution eps = p.innovation();
  UniformStream u(seed);
  std::vector<double> path;
  path.reserve(n);
  double sigma2 = p.stationary_variance();
  double x = 0.0;
  const std::size_t steps = p.burn_in + n;
  for (std::size_t t = 0; t < steps; ++t) {
    if (t > 0) sigma2 = p.a0 + p.a1 * x * x + p.b0 * sigma2;
    x = std::sqrt(sigma2) * eps.quantile(u.next());
    if (t >= p.burn_in) path.push_back(x);
  }
  GarchPath out;
  out.sorted = SortedSample::from_unsorted(path, Provenance::garch);
  out.path = std::move(path);
  return out;
}

}  // namespace deviatile
