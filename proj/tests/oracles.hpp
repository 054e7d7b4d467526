#pragma once

// Brute-force reference computations used by the tests. Nothing here calls the
// library routine it is meant to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "osb/matrix.hpp"

namespace osb::oracle {

/// Every map {0..n-1} -> {0..N-1} (or every permutation when `injective`), by recursion.
inline std::vector<std::vector<std::uint32_t>> all_maps(std::size_t n, std::size_t cols, bool injective) {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> cur;
  std::vector<bool> used(cols, false);
  std::function<void()> rec = [&] {
    if (cur.size() == n) {
      out.push_back(cur);
      return;
    }
    for (std::uint32_t j = 0; j < cols; ++j) {
      if (injective && used[j]) continue;
      used[j] = true;
      cur.push_back(j);
      rec();
      cur.pop_back();
      used[j] = false;
    }
  };
  rec();
  return out;
}

/// Mean over `maps` of the sum of the ell largest path values, in long double.
inline long double expectation(const Matrix& a, const std::vector<std::vector<std::uint32_t>>& maps, std::size_t ell) {
  long double total = 0.0L;
  for (const auto& g : maps) {
    std::vector<double> v;
    for (std::size_t i = 0; i < g.size(); ++i) v.push_back(a(i, g[i]));
    std::sort(v.begin(), v.end());
    std::reverse(v.begin(), v.end());
    for (std::size_t k = 0; k < ell; ++k) total += v[k];
  }
  return total / static_cast<long double>(maps.size());
}

/// min over thresholds c of sum (|x_i| - c)_+ + t c: a 10^4-point grid on
/// [0, max|x_i|] together with the kinks c = |x_i|, where a convex piecewise-linear
/// function attains its minimum.
inline double k_functional_grid(const std::vector<double>& x, double t, int grid = 10000) {
  double mx = 0.0;
  for (double v : x) mx = std::max(mx, std::fabs(v));
  std::vector<double> cs;
  for (int k = 0; k < grid; ++k) cs.push_back(mx * k / (grid - 1));
  for (double v : x) cs.push_back(std::fabs(v));
  double best = std::numeric_limits<double>::infinity();
  for (double c : cs) {
    double cost = t * c;
    for (double v : x) cost += std::max(std::fabs(v) - c, 0.0);
    best = std::min(best, cost);
  }
  return best;
}

/// ||x||_{M_j} in closed form: with A the r largest entries, the modular equation
/// sum_{A} (x_i/lambda - 1/j) = 1 gives lambda = sum_A x_i / (1 + r/j); the right r
/// is the one whose active set is consistent with lambda.
inline double mj_norm(std::vector<double> x, std::size_t j) {
  for (double& v : x) v = std::fabs(v);
  std::sort(x.begin(), x.end(), std::greater<>());
  if (x.empty() || x.front() == 0.0) return 0.0;
  const double jd = static_cast<double>(j);
  double prefix = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 1; r <= x.size(); ++r) {
    prefix += x[r - 1];
    const double lambda = prefix / (1.0 + static_cast<double>(r) / jd);
    const bool inside = x[r - 1] * jd > lambda * (1 - 1e-15);
    const bool outside = r == x.size() || x[r] * jd <= lambda * (1 + 1e-15);
    if (inside && outside) best = std::min(best, lambda);
  }
  return best;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t cols, int style = 0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> d(0, 9);
  std::vector<double> e(n * cols);
  for (double& v : e) {
    if (style == 1)
      v = d(rng);
    else if (style == 2)
      v = u(rng) < 0.3 ? u(rng) : 0.0;
    else
      v = u(rng);
  }
  return Matrix(n, cols, std::move(e));
}

}  // namespace osb::oracle
