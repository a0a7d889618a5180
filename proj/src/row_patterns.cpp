#include "rpdp/row_patterns.hpp"

#include <algorithm>
#include <numeric>

namespace rpdp {

RowPatterns::RowPatterns(const Dataset& data, std::span<const std::size_t> keys,
                         std::span<const std::size_t> rows)
    : width_(data.width()) {
  std::vector<std::size_t> order;
  if (rows.empty()) {
    order.resize(data.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
  } else {
    order.assign(rows.begin(), rows.end());
  }
  std::vector<std::size_t> columns(keys.begin(), keys.end());
  if (columns.empty()) {
    columns.resize(width_);
    std::iota(columns.begin(), columns.end(), std::size_t{0});
  }

  auto less = [&](std::size_t a, std::size_t b) {
    auto ra = data.row(order[a]);
    auto rb = data.row(order[b]);
    for (std::size_t c : columns) {
      if (ra[c] != rb[c]) return ra[c] < rb[c];
    }
    return false;
  };
  std::vector<std::size_t> sorted(order.size());
  std::iota(sorted.begin(), sorted.end(), std::size_t{0});
  std::stable_sort(sorted.begin(), sorted.end(), less);

  pattern_of_.resize(order.size());
  std::uint32_t id = 0;
  for (std::size_t s = 0; s < sorted.size(); ++s) {
    if (s > 0 && less(sorted[s - 1], sorted[s])) ++id;
    if (id == size()) {
      auto r = data.row(order[sorted[s]]);
      representatives_.insert(representatives_.end(), r.begin(), r.end());
    }
    pattern_of_[sorted[s]] = id;
  }
}

}  // namespace rpdp
