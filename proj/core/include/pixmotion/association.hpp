#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace pixmotion {

// Greedy one-to-one timestamp matching. Every pair with |a - b| <= max_gap is
// a candidate; candidates are taken by increasing gap (ties broken by the
// index into `a`, then `b`). Both inputs must be sorted ascending. Returns
// (index into a, index into b) sorted by the first index.
std::vector<std::pair<std::size_t, std::size_t>> associate_stamps(std::span<const double> a,
                                                                  std::span<const double> b, double max_gap);

}  // namespace pixmotion
