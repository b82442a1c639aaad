#pragma once

// Data-parallel inner loops. Every kernel comes in two flavours:
//   serial::   the plain loop, kept as the reference the tests compare against;
//   parallel:: the OpenMP version used by the library.
// Parallel reductions write one partial per row and combine them serially in
// row order, so results do not depend on the thread count.

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#include <omp.h>

namespace mfldp::kernels {

// A pair potential is any callable `double(std::span<const double> diff,
// std::span<double> grad)` returning W(diff) and, when grad is non-empty,
// writing grad W(diff).

namespace serial {

// sum over all ordered pairs (i, j) of W(x_i - x_j), diagonal included.
template <class Pot>
double pair_energy(std::span<const double> coords, std::size_t n, std::size_t d, const Pot& pot) {
  std::vector<double> diff(d);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < d; ++k) diff[k] = coords[i * d + k] - coords[j * d + k];
      total += pot(std::span<const double>(diff), std::span<double>());
    }
  }
  return total;
}

// force[i] = sum_j grad W(x_i - x_j); returns the ordered-pair energy sum.
template <class Pot>
double pair_energy_and_force(std::span<const double> coords, std::size_t n, std::size_t d,
                             const Pot& pot, std::span<double> force) {
  std::vector<double> diff(d), grad(d);
  double total = 0.0;
  for (std::size_t i = 0; i < n * d; ++i) force[i] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < d; ++k) diff[k] = coords[i * d + k] - coords[j * d + k];
      total += pot(std::span<const double>(diff), std::span<double>(grad));
      for (std::size_t k = 0; k < d; ++k) force[i * d + k] += grad[k];
    }
  }
  return total;
}

// out[i] = sum_j lags[i - j + m - 1] * p[j], lags has 2m - 1 entries.
void convolve(std::span<const double> lags, std::span<const double> p, std::span<double> out);

}  // namespace serial

namespace parallel {

template <class Pot>
double pair_energy(std::span<const double> coords, std::size_t n, std::size_t d, const Pot& pot) {
  std::vector<double> rows(n, 0.0);
  const auto nn = static_cast<long long>(n);
#pragma omp parallel
  {
    std::vector<double> diff(d);
#pragma omp for schedule(static)
    for (long long ii = 0; ii < nn; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < d; ++k) diff[k] = coords[i * d + k] - coords[j * d + k];
        row += pot(std::span<const double>(diff), std::span<double>());
      }
      rows[i] = row;
    }
  }
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

template <class Pot>
double pair_energy_and_force(std::span<const double> coords, std::size_t n, std::size_t d,
                             const Pot& pot, std::span<double> force) {
  std::vector<double> rows(n, 0.0);
  const auto nn = static_cast<long long>(n);
#pragma omp parallel
  {
    std::vector<double> diff(d), grad(d);
#pragma omp for schedule(static)
    for (long long ii = 0; ii < nn; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      double row = 0.0;
      for (std::size_t k = 0; k < d; ++k) force[i * d + k] = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < d; ++k) diff[k] = coords[i * d + k] - coords[j * d + k];
        row += pot(std::span<const double>(diff), std::span<double>(grad));
        for (std::size_t k = 0; k < d; ++k) force[i * d + k] += grad[k];
      }
      rows[i] = row;
    }
  }
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

void convolve(std::span<const double> lags, std::span<const double> p, std::span<double> out);

// Runs body(i) for i in [0, count). The first exception thrown by any index is
// rethrown on the calling thread after the loop.
template <class Body>
void for_each_index(std::size_t count, const Body& body) {
  std::vector<std::exception_ptr> errors(count);
  const auto nn = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long ii = 0; ii < nn; ++ii) {
    try {
      body(static_cast<std::size_t>(ii));
    } catch (...) {
      errors[static_cast<std::size_t>(ii)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace parallel

// Size of a maximum matching between sorted x and sorted y using only edges with
// lo <= x_i - y_j <= hi. Greedy two-pointer scan; optimal because the admissible
// range of j is an interval whose ends are nondecreasing in i.
std::size_t window_matching(std::span<const double> xs, std::span<const double> ys, double lo,
                            double hi);

// Reference for window_matching: Hopcroft-Karp on the explicit bipartite graph.
std::size_t window_matching_reference(std::span<const double> xs, std::span<const double> ys,
                                      double lo, double hi);

// max over anchors a of window_matching(xs, ys, a, a + width).
namespace serial {
std::size_t best_anchored_matching(std::span<const double> xs, std::span<const double> ys,
                                   std::span<const double> anchors, double width);
}
namespace parallel {
std::size_t best_anchored_matching(std::span<const double> xs, std::span<const double> ys,
                                   std::span<const double> anchors, double width);
}

// Thread cap for every parallel kernel; 0 leaves the OpenMP default.
void set_thread_count(int threads);
int thread_count();

}  // namespace mfldp::kernels
