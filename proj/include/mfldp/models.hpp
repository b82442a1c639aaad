#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfldp/measures.hpp"

namespace mfldp {

// W(x) = sum_k c_k |x|^{e_k}. Integer exponents are evaluated by repeated
// multiplication so the MV hot loop never calls pow for the shipped potentials.
struct RadialPolynomial {
  std::vector<std::pair<double, double>> terms;  // (exponent, coefficient)

  double value_r(double r) const;
  // W'(r) / r, the factor multiplying x in grad W(x); 0 at r = 0
  double grad_factor_r(double r) const;
  double leading_exponent() const;
  double leading_coefficient() const;

  double operator()(std::span<const double> x, std::span<double> grad) const;
};

struct MvModel {
  std::string id;
  std::function<double(std::span<const double>)> potential;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  std::function<double(std::span<const double>)> w_sharp;  // the part carrying the growth
  std::optional<RadialPolynomial> radial;                  // set for polynomial potentials
  double ell = 1.0;
  double kappa = 0.0;
  double sigma2 = 2.0;

  // leading term is W-sharp, the rest W-flat; ell and kappa come from the leading term
  static MvModel from_radial(RadialPolynomial poly, double sigma2, std::string id = "mv:radial");
  static MvModel quadratic(double sigma2);  // x^2
  static MvModel cubic(double sigma2);      // |x|^3
  static MvModel abs(double sigma2);        // |x|
};

struct RbModel {
  std::string id;
  std::function<double(double)> B;
  std::function<double(double)> b;
  double sigma2 = 2.0;
  std::vector<double> coefficients;  // B(u) = sum_k a_k u^k when polynomial
  // s -> B(1 - s), accurate for small s; empty means evaluate B(1 - s) directly
  std::function<double(double)> B_upper;

  // B at a point given both F and 1 - F; the upper half uses the survival value
  double flux(double F, double S) const { return (F > 0.5 && B_upper) ? B_upper(S) : B(F); }

  static RbModel polynomial(std::vector<double> coefficients, double sigma2, std::string id = "rb:polynomial");
  static RbModel logistic_flux(double sigma2);  // u(1 - u)
};

double mv_energy(const Configuration& c, const MvModel& m);
// row-major n x d; component i is -(1/n) sum_j grad W(x_i - x_j)
std::vector<double> mv_drift(const Configuration& c, const MvModel& m);

double rb_energy(const Configuration& c, const RbModel& m);
// the two paths rb_energy is built from
double rb_energy_gap_sum(std::span<const double> xs, const RbModel& m);
double rb_energy_coefficients(std::span<const double> xs, const RbModel& m);
// b_n(k) = n (B(k/n) - B((k-1)/n)), k = 1..n, returned at index k - 1
std::vector<double> rb_rank_drifts(std::size_t n, const RbModel& m);
// rank order with ties broken by original index
std::vector<std::size_t> rank_order(std::span<const double> xs);
std::vector<double> rb_drift(const Configuration& c, const RbModel& m);

// Raw-buffer versions used by the sampler. drift has n*d entries.
double mv_energy_raw(std::span<const double> x, std::size_t n, std::size_t d, const MvModel& m);
double mv_energy_and_drift_raw(std::span<const double> x, std::size_t n, std::size_t d, const MvModel& m,
                               std::span<double> drift);
double rb_energy_and_drift_raw(std::span<const double> x, std::span<const double> rank_drifts,
                               std::span<double> drift, std::vector<std::size_t>& order_scratch);

// kappa = inf over (0,1) of B(u) / (2u(1-u)), with the endpoint limits b(0)/2 and -b(1)/2.
struct KappaEstimate {
  double kappa;
  double argmin;
};
KappaEstimate rb_kappa(const RbModel& m, std::size_t grid_points = 10000);

enum class Verdict { pass, fail, assumed, trend };
const char* to_string(Verdict v);

struct AssumptionCheck {
  std::string id;
  Verdict verdict;
  std::string detail;
  std::map<std::string, double> values;
};

struct AssumptionReport {
  std::string model_id;
  std::vector<AssumptionCheck> checks;

  bool all_passed() const;  // ignores assumed and trend entries
  const AssumptionCheck* find(const std::string& id) const;
};

AssumptionReport check_assumptions(const MvModel& m, std::size_t samples, std::uint64_t seed = 1,
                                   std::size_t d = 1);
AssumptionReport check_assumptions(const RbModel& m, std::size_t samples, std::uint64_t seed = 1);

}  // namespace mfldp
