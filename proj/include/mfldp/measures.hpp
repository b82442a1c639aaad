#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfldp {

// n points in R^d stored row-major: coordinate k of point i is coords[i*d + k].
class Configuration {
 public:
  Configuration(std::size_t n, std::size_t d, std::vector<double> coords);
  static Configuration from_1d(std::vector<double> xs);

  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  const std::vector<double>& coords() const noexcept { return coords_; }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * d_, d_}; }
  double operator()(std::size_t i, std::size_t k) const { return coords_[i * d_ + k]; }

  bool operator==(const Configuration&) const = default;

 protected:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> coords_;
};

// A configuration on the hyperplane where every coordinate sums to zero.
class CenteredConfiguration : public Configuration {
 public:
  // Throws InvalidArgument unless each per-dimension sum is within 1e-12 * n of zero.
  CenteredConfiguration(std::size_t n, std::size_t d, std::vector<double> coords);
  explicit CenteredConfiguration(Configuration c);
};

// Subtracts the per-dimension mean in place.
void project_to_hyperplane(std::span<double> coords, std::size_t n, std::size_t d);

CenteredConfiguration center(const Configuration& c);

// Equal-weight atoms.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::size_t n, std::size_t d, std::vector<double> atoms);
  explicit EmpiricalMeasure(const Configuration& c);
  static EmpiricalMeasure from_1d(std::vector<double> xs);

  std::size_t size() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  const std::vector<double>& atoms() const noexcept { return atoms_; }
  std::span<const double> atom(std::size_t i) const { return {atoms_.data() + i * d_, d_}; }

  // d = 1 only.
  std::vector<double> sorted_atoms() const;
  double cdf(double x) const;
  std::vector<double> mean() const;

  bool operator==(const EmpiricalMeasure&) const = default;

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> atoms_;
};

// tau_y: the integral of f against the result is the integral of f(x + y)
// against m, so every atom moves to x + y.
EmpiricalMeasure translate(const EmpiricalMeasure& m, std::span<const double> y);
EmpiricalMeasure translate(const EmpiricalMeasure& m, double y);

EmpiricalMeasure center(const EmpiricalMeasure& m);

double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p = 1.0);
// The two independent W1 paths: integral of |F_a - F_b|, and sorted matching (equal sizes).
double wasserstein_1d_cdf(const EmpiricalMeasure& a, const EmpiricalMeasure& b);
double wasserstein_1d_matching(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p = 1.0);

double prohorov_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

enum class BaseMetric { prohorov, wasserstein };

struct MetricSpec {
  BaseMetric base = BaseMetric::prohorov;
  double p = 1.0;  // Wasserstein order
};

struct QuotientResult {
  double distance;
  double shift;  // a minimizing y for base(a, translate(b, y))
};

QuotientResult quotient_distance_with_shift(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                            const MetricSpec& metric);
double quotient_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                         const MetricSpec& metric);

}  // namespace mfldp
