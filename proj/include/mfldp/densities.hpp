#pragma once

#include <cstddef>
#include <vector>

#include "mfldp/models.hpp"

namespace mfldp {

// m cells of width (hi - lo) / m on [lo, hi].
struct Grid {
  double lo = -40.0;
  double hi = 40.0;
  std::size_t m = 16000;

  double dx() const noexcept { return (hi - lo) / static_cast<double>(m); }
  double center(std::size_t i) const noexcept { return lo + (static_cast<double>(i) + 0.5) * dx(); }
  double edge(std::size_t i) const noexcept { return lo + static_cast<double>(i) * dx(); }
  void validate() const;
  bool operator==(const Grid&) const = default;
};

// Symmetric grid wide enough that the shipped stationary densities are below
// 1e-16 at the boundary: half-width max(40, 20 sigma2), cell width 0.005.
Grid default_grid(double sigma2);

class GridDensity {
 public:
  // values must integrate to 1 within 1e-10
  GridDensity(Grid grid, std::vector<double> values);
  // rescales values to integrate to 1
  static GridDensity normalized(Grid grid, std::vector<double> values);
  template <class F>
  static GridDensity from_function(const Grid& g, F&& f) {
    std::vector<double> v(g.m);
    for (std::size_t i = 0; i < g.m; ++i) v[i] = f(g.center(i));
    return normalized(g, std::move(v));
  }

  const Grid& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  // F at the m + 1 cell edges, and at the m cell centres (linear inside a cell)
  std::vector<double> cdf_edges() const;
  std::vector<double> cdf_centers() const;
  double mean() const;
  double quantile(double u) const;

  bool operator==(const GridDensity&) const = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

// q(x) = p(x - y), evaluated exactly on the piecewise-linear CDF; mass pushed
// past the grid is dropped and the result renormalized.
GridDensity translate(const GridDensity& p, double y);
GridDensity shift_cells(const GridDensity& p, long k);
GridDensity recenter(const GridDensity& p);

double entropy(const GridDensity& p);
// +infinity when p charges a cell where q vanishes
double relative_entropy(const GridDensity& p, const GridDensity& q);
double energy_of_density(const GridDensity& p, const MvModel& m);
double energy_of_density(const GridDensity& p, const RbModel& m);
double free_energy(const GridDensity& p, const MvModel& m);
double free_energy(const GridDensity& p, const RbModel& m);

struct StationaryOptions {
  double damping = 0.5;
  double tol = 1e-10;
  std::size_t max_iter = 10000;
};

struct StationaryResult {
  GridDensity density;
  std::size_t iterations;
  double change;    // sup-norm change at the last iteration
  double residual;  // L1 norm of the stationary Fokker-Planck residual
};

StationaryResult stationary_rb(const RbModel& m, const Grid& g, const StationaryOptions& opt = {});
// grid L1 norm of (sigma2/2) p'' - (b(F) p)'
double fokker_planck_residual_l1(const GridDensity& p, const RbModel& m);

struct MinimizeOptions {
  double step = 0.5;
  double tol = 1e-6;
  std::size_t max_iter = 5000;
};

struct MinimizeResult {
  GridDensity density;
  double f_star;
  std::size_t iterations;
  double spread;  // max - min of the first variation over supported cells
};

// first variation log p + 1 + (2/sigma2) (W * p)
std::vector<double> first_variation(const GridDensity& p, const MvModel& m);
MinimizeResult minimize_free_energy_mv(const MvModel& m, const Grid& g, const MinimizeOptions& opt = {});

double rate(const GridDensity& p, const MvModel& m, double f_star);
double rate(const GridDensity& p, const RbModel& m, double f_star);

struct RateGap {
  double relative_entropy_part;
  double gamma_part;
  double sum() const { return relative_entropy_part + gamma_part; }
};
RateGap rate_gap(const GridDensity& p, const RbModel& m, const GridDensity& p_inf);

}  // namespace mfldp
