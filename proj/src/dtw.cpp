#include "convxai/dtw.hpp"

#include <algorithm>
#include <limits>

#include "convxai/error.hpp"

namespace convxai {

double label_mismatch_cost(AspectLabel a, AspectLabel b) { return a == b ? 0.0 : 1.0; }

DtwResult dtw_align(std::span<const AspectLabel> a, std::span<const AspectLabel> b,
                    const LabelCost& cost) {
  if (a.empty() || b.empty()) throw InvalidInput("dtw_align needs two non-empty sequences");
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> acc(n * m);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double local = cost(a[i], b[j]);
      if (i == 0 && j == 0) {
        at(i, j) = local;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1));
      if (j > 0) best = std::min(best, at(i, j - 1));
      if (i > 0) best = std::min(best, at(i - 1, j));
      at(i, j) = local + best;
    }
  }

  DtwResult result;
  result.distance = at(n - 1, m - 1);
  std::size_t i = n - 1;
  std::size_t j = m - 1;
  result.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = at(i - 1, j - 1);
      const double left = at(i, j - 1);  // reached (i,j) via a (0,1) step
      const double up = at(i - 1, j);    // reached (i,j) via a (1,0) step
      if (diag <= left && diag <= up) {
        --i;
        --j;
      } else if (left <= up) {
        --j;
      } else {
        --i;
      }
    }
    result.path.emplace_back(i, j);
  }
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

double dtw_distance(std::span<const AspectLabel> a, std::span<const AspectLabel> b) {
  if (a.empty() || b.empty()) throw InvalidInput("dtw_distance needs two non-empty sequences");
  const std::size_t m = b.size();
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double local = label_mismatch_cost(a[i], b[j]);
      if (i == 0 && j == 0) {
        cur[j] = local;
      } else if (i == 0) {
        cur[j] = local + cur[j - 1];
      } else if (j == 0) {
        cur[j] = local + prev[j];
      } else {
        cur[j] = local + std::min({prev[j - 1], cur[j - 1], prev[j]});
      }
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

}  // namespace convxai
