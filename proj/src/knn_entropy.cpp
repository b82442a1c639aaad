#include "mfldp/knn_entropy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

#include "mfldp/errors.hpp"

namespace mfldp {

double knn_differential_entropy(std::span<const double> xs, std::size_t k) {
  const std::size_t N = xs.size();
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (N <= k) throw InsufficientData("nearest-neighbour entropy needs more than k points");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());

  double acc = 0.0;
  std::size_t zero = 0;
  for (std::size_t i = 0; i < N; ++i) {
    // merge outwards from i; the k-th step lands on the k-th neighbour
    std::size_t l = i, r = i;
    double eps = 0.0;
    for (std::size_t step = 0; step < k; ++step) {
      const double dl = l > 0 ? s[i] - s[l - 1] : INFINITY;
      const double dr = r + 1 < N ? s[r + 1] - s[i] : INFINITY;
      if (dl <= dr) {
        eps = dl;
        --l;
      } else {
        eps = dr;
        ++r;
      }
    }
    if (eps > 0.0)
      acc += std::log(eps);
    else
      ++zero;
  }
  if (zero == N) throw InsufficientData("all nearest-neighbour distances are zero");
  const double used = static_cast<double>(N - zero);
  using boost::math::digamma;
  return digamma(static_cast<double>(N)) - digamma(static_cast<double>(k)) + std::log(2.0) + acc / used;
}

}  // namespace mfldp
