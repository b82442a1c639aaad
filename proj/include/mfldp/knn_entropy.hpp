#pragma once

#include <cstddef>
#include <span>

namespace mfldp {

// Kozachenko-Leonenko estimate of the differential entropy -int p log p of a
// one-dimensional sample, using k-th nearest-neighbour distances.
double knn_differential_entropy(std::span<const double> xs, std::size_t k = 1);

// Boltzmann convention int p log p, i.e. minus the above.
inline double knn_boltzmann_entropy(std::span<const double> xs, std::size_t k = 1) {
  return -knn_differential_entropy(xs, k);
}

}  // namespace mfldp
