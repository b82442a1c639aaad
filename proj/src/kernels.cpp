#include "mfldp/kernels.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace mfldp::kernels {

void serial::convolve(std::span<const double> lags, std::span<const double> p, std::span<double> out) {
  const std::size_t m = p.size();
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += lags[i + m - 1 - j] * p[j];
    out[i] = acc;
  }
}

void parallel::convolve(std::span<const double> lags, std::span<const double> p, std::span<double> out) {
  const std::size_t m = p.size();
  const auto mm = static_cast<long long>(m);
#pragma omp parallel for schedule(static)
  for (long long ii = 0; ii < mm; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double* row = lags.data() + i + m - 1;
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += row[-static_cast<std::ptrdiff_t>(j)] * p[j];
    out[i] = acc;
  }
}

std::size_t window_matching(std::span<const double> xs, std::span<const double> ys, double lo,
                            double hi) {
  std::size_t i = 0, j = 0, matched = 0;
  while (i < xs.size() && j < ys.size()) {
    const double diff = xs[i] - ys[j];
    if (diff > hi) {
      ++j;
    } else if (diff < lo) {
      ++i;
    } else {
      ++matched;
      ++i;
      ++j;
    }
  }
  return matched;
}

std::size_t window_matching_reference(std::span<const double> xs, std::span<const double> ys,
                                      double lo, double hi) {
  const std::size_t nx = xs.size(), ny = ys.size();
  std::vector<std::vector<std::size_t>> adj(nx);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const double diff = xs[i] - ys[j];
      if (diff >= lo && diff <= hi) adj[i].push_back(j);
    }

  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  constexpr std::size_t inf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> match_x(nx, none), match_y(ny, none), dist(nx);

  auto bfs = [&] {
    std::queue<std::size_t> q;
    bool found = false;
    for (std::size_t i = 0; i < nx; ++i) {
      if (match_x[i] == none) {
        dist[i] = 0;
        q.push(i);
      } else {
        dist[i] = inf;
      }
    }
    while (!q.empty()) {
      const std::size_t i = q.front();
      q.pop();
      for (std::size_t j : adj[i]) {
        const std::size_t k = match_y[j];
        if (k == none) {
          found = true;
        } else if (dist[k] == inf) {
          dist[k] = dist[i] + 1;
          q.push(k);
        }
      }
    }
    return found;
  };

  // recursion depth is bounded by the augmenting path length, fine at test sizes
  auto dfs = [&](auto&& self, std::size_t i) -> bool {
    for (std::size_t j : adj[i]) {
      const std::size_t k = match_y[j];
      if (k == none || (dist[k] == dist[i] + 1 && self(self, k))) {
        match_x[i] = j;
        match_y[j] = i;
        return true;
      }
    }
    dist[i] = inf;
    return false;
  };

  std::size_t matched = 0;
  while (bfs())
    for (std::size_t i = 0; i < nx; ++i)
      if (match_x[i] == none && dfs(dfs, i)) ++matched;
  return matched;
}

std::size_t serial::best_anchored_matching(std::span<const double> xs, std::span<const double> ys,
                                           std::span<const double> anchors, double width) {
  std::size_t best = 0;
  for (double a : anchors) best = std::max(best, window_matching(xs, ys, a, a + width));
  return best;
}

std::size_t parallel::best_anchored_matching(std::span<const double> xs, std::span<const double> ys,
                                             std::span<const double> anchors, double width) {
  std::size_t best = 0;
  const auto count = static_cast<long long>(anchors.size());
#pragma omp parallel for schedule(static) reduction(max : best)
  for (long long k = 0; k < count; ++k) {
    const double a = anchors[static_cast<std::size_t>(k)];
    best = std::max(best, window_matching(xs, ys, a, a + width));
  }
  return best;
}

void set_thread_count(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace mfldp::kernels
