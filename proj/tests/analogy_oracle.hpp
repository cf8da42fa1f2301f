#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace mglab::testing {

// Exhaustive cosine argmax of b - a + c over unit-normalized rows, skipping
// a, b and c; first maximum wins.
inline std::size_t brute_force_analogy(const std::vector<std::vector<double>>& rows, std::size_t a, std::size_t b,
                                       std::size_t c) {
  auto unit = [](std::vector<double> v) {
    double n = 0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (auto& x : v) x /= n;
    return v;
  };
  const auto ua = unit(rows[a]), ub = unit(rows[b]), uc = unit(rows[c]);
  std::vector<double> q(ua.size());
  for (std::size_t k = 0; k < q.size(); ++k) q[k] = ub[k] - ua[k] + uc[k];
  const auto uq = unit(q);
  std::size_t best = rows.size();
  double best_cos = -2;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == a || i == b || i == c) continue;
    const auto v = unit(rows[i]);
    double cos = 0;
    for (std::size_t k = 0; k < v.size(); ++k) cos += v[k] * uq[k];
    if (cos > best_cos) {
      best_cos = cos;
      best = i;
    }
  }
  return best;
}

}  // namespace mglab::testing
