#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace deviatile {

// Second-order regular variation of the tail quantile function U:
// U(tx)/U(t) - x^gamma ~ A(t) x^gamma (x^rho - 1)/rho.
struct TwoRVMeta {
  double gamma = 0.0;
  double rho = 0.0;
  std::function<double(double)> aux;  // t -> A(t)
};

// Shifted ("Lomax") Pareto: F(x) = 1 - (theta/(x+theta))^alpha on [0, inf).
class ParetoModel {
 public:
  ParetoModel(double alpha, double theta);

  double alpha() const noexcept { return alpha_; }
  double theta() const noexcept { return theta_; }

  double cdf(double x) const;
  double survival(double x) const;
  double pdf(double x) const;
  double quantile(double tau) const;
  // Inverse survival: the x with survival(x) = s, exact for tiny s.
  double upper_quantile(double s) const;
  double mean() const;      // +inf when alpha <= 1
  double variance() const;  // +inf when alpha <= 2

  // gamma = 1/alpha, rho = -1/alpha, A(t) = gamma t^-gamma
  TwoRVMeta tail() const;

 private:
  double alpha_;
  double theta_;
};

// Student's t with alpha degrees of freedom. The CDF uses the
// incomplete-beta representation P(T > t) = I_{a/(a+t^2)}(a/2, 1/2)/2.
class StudentTModel {
 public:
  explicit StudentTModel(double alpha);

  double alpha() const noexcept { return alpha_; }

  double cdf(double x) const;
  double survival(double x) const;
  double pdf(double x) const;
  double quantile(double tau) const;
  double upper_quantile(double s) const;
  double mean() const;      // NaN when alpha <= 1 (undefined)
  double variance() const;  // +inf when alpha <= 2

  // gamma = 1/alpha, rho = -2/alpha,
  // A(t) = (alpha+1)/(alpha+2) * (c_alpha t)^(-2/alpha).
  TwoRVMeta tail() const;
  double c_alpha() const;

 private:
  double alpha_;
  double log_norm_;  // log of the density normalizing constant
  double log_beta_;  // log B(alpha/2, 1/2)
};

// A heavy-tailed law location + scale * Z, Z Pareto or Student-t.
class Distribution {
 public:
  using Shape = std::variant<ParetoModel, StudentTModel>;

  static Distribution pareto(double alpha, double theta = 1.0);
  static Distribution student_t(double alpha);

  explicit Distribution(Shape shape, double location = 0.0, double scale = 1.0);

  Distribution shifted(double c) const;
  Distribution scaled(double lambda) const;

  const Shape& shape() const noexcept { return shape_; }
  double location() const noexcept { return location_; }
  double scale() const noexcept { return scale_; }
  bool is_pareto() const noexcept { return std::holds_alternative<ParetoModel>(shape_); }

  double cdf(double x) const;
  double survival(double x) const;
  double pdf(double x) const;
  double quantile(double tau) const;
  double upper_quantile(double s) const;
  double mean() const;
  double variance() const;

  // Lower end of the support (-inf for Student-t).
  double support_lower() const;
  // Tail index gamma of the right tail.
  double tail_index() const;
  // Second-order metadata. Location shifts alter A; supported for Pareto
  // (U stays of the form a t^gamma + b) and for unshifted Student-t.
  TwoRVMeta tail() const;

  std::string describe() const;

 private:
  Shape shape_;
  double location_;
  double scale_;
};

double pareto_quantile(const ParetoModel& m, double tau);
double student_t_quantile(const StudentTModel& m, double tau);

enum class Provenance { iid, garch, file, bootstrap, literal };
std::string to_string(Provenance p);

// Ascending batch of observations.
class SortedSample {
 public:
  SortedSample() = default;
  static SortedSample from_unsorted(std::vector<double> values, Provenance p = Provenance::literal);
  // Throws InvalidArgument if values are not ascending.
  static SortedSample from_sorted(std::vector<double> values, Provenance p = Provenance::literal);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  // X_{n-i,n}: i = 0 is the maximum.
  double from_top(std::size_t i) const { return values_[values_.size() - 1 - i]; }
  Provenance provenance() const noexcept { return provenance_; }

  SortedSample scaled(double lambda) const;

 private:
  SortedSample(std::vector<double> v, Provenance p) : values_(std::move(v)), provenance_(p) {}
  std::vector<double> values_;
  Provenance provenance_ = Provenance::literal;
};

// Uniform (0,1) stream behind every sampler. Replicate r of an experiment
// with base seed s uses seed s + r.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed);
  double next();  // strictly inside (0,1), 53-bit resolution
  std::uint64_t next_u64();

 private:
  std::mt19937_64 engine_;
};

// n inverse-transform draws in generation order.
std::vector<double> draw_iid(const Distribution& d, std::size_t n, std::uint64_t seed);
SortedSample sample_iid(const Distribution& d, std::size_t n, std::uint64_t seed);

struct GarchProcess {
  double a0 = 0.0181;
  double a1 = 0.1476;
  double b0 = 0.8497;
  double nu = 6.54;
  std::size_t burn_in = 1000;

  void validate() const;
  double stationary_variance() const { return a0 / (1.0 - a1 - b0); }
  // Unit-variance innovation law t(nu) * sqrt((nu-2)/nu).
  Distribution innovation() const;
};

struct GarchPath {
  std::vector<double> path;  // time order
  SortedSample sorted;
};

GarchPath simulate_garch(const GarchProcess& p, std::size_t n, std::uint64_t seed);

}  // namespace deviatile
