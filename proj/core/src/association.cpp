#include "pixmotion/association.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace pixmotion {

std::vector<std::pair<std::size_t, std::size_t>> associate_stamps(std::span<const double> a,
                                                                  std::span<const double> b, double max_gap) {
  struct Candidate {
    double gap;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Candidate> candidates;
  // Both sides are sorted, so a sliding window bounds the candidate set.
  std::size_t lo = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    while (lo < b.size() && b[lo] < a[i] - max_gap) ++lo;
    for (std::size_t j = lo; j < b.size() && b[j] <= a[i] + max_gap; ++j) {
      const double gap = std::abs(b[j] - a[i]);
      if (gap <= max_gap) candidates.push_back({gap, i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(x.gap, x.i, x.j) < std::tie(y.gap, y.i, y.j);
  });

  std::vector<char> a_used(a.size(), 0);
  std::vector<char> b_used(b.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const Candidate& c : candidates) {
    if (a_used[c.i] || b_used[c.j]) continue;
    a_used[c.i] = b_used[c.j] = 1;
    pairs.emplace_back(c.i, c.j);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace pixmotion
