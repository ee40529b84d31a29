#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "convxai/aspect.hpp"

namespace convxai {

using LabelCost = std::function<double(AspectLabel, AspectLabel)>;

// 0 for equal labels, 1 otherwise.
double label_mismatch_cost(AspectLabel a, AspectLabel b);

struct DtwResult {
  double distance = 0.0;
  // Monotone alignment from (0,0) to (|a|-1, |b|-1); steps are (1,0),
  // (0,1) or (1,1).
  std::vector<std::pair<std::size_t, std::size_t>> path;
};

// Classic dynamic time warping with the three standard steps. When several
// predecessors share the minimal accumulated cost the backtrack prefers the
// diagonal, then the (0,1) step, then the (1,0) step.
// Throws InvalidInput when either sequence is empty.
DtwResult dtw_align(std::span<const AspectLabel> a, std::span<const AspectLabel> b,
                    const LabelCost& cost = label_mismatch_cost);

// Distance only; no path allocation. Uses the 0/1 label cost.
double dtw_distance(std::span<const AspectLabel> a, std::span<const AspectLabel> b);

}  // namespace convxai
