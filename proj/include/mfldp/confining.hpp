#pragma once

#include <cstddef>
#include <span>

#include "mfldp/measures.hpp"

namespace mfldp {

// V(x) = eta |x|^ell with temperature sigma2 in dimension d.
struct ConfiningSpec {
  double eta = 1.0;
  double ell = 2.0;
  std::size_t d = 1;
  double sigma2 = 2.0;

  void validate() const;
};

// integral over R^d of exp(-2 eta |x|^ell / sigma2)
double z_eta(const ConfiningSpec& s);
// same integral by radial quadrature, whatever the closed forms say
double z_eta_quadrature(const ConfiningSpec& s);

// -(sigma2 / 2n) log of the integral over common shifts zeta of
// exp(-(2/sigma2) sum_i V(x_i + zeta)).
double hat_v(const CenteredConfiguration& c, const ConfiningSpec& s);
double hat_v_raw(std::span<const double> x, std::size_t n, std::size_t d, const ConfiningSpec& s);
// generic quadrature path (d = 1), kept separate so the closed forms can be checked against it
double hat_v_quadrature(std::span<const double> x, const ConfiningSpec& s);

struct HatVBounds {
  double lower;
  double upper;
};
HatVBounds hat_v_bounds(const CenteredConfiguration& c, const ConfiningSpec& s);

struct VarthetaResult {
  double value;
  double shift;  // minimizing y in inf_y int |x + y|^ell dm
};
VarthetaResult vartheta_with_shift(const EmpiricalMeasure& m, double ell);
double vartheta(const EmpiricalMeasure& m, double ell);
// same on a raw 1D sample, no validation beyond ell
double vartheta_raw(std::span<const double> xs, double ell);

}  // namespace mfldp
