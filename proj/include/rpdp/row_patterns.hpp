#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rpdp/dataset.hpp"

namespace rpdp {

/// Groups rows that agree on a set of key columns.
///
/// Each distinct key pattern keeps one representative row (full width, so it
/// can be fed to a model); pattern_of(i) maps the i-th listed row to its
/// pattern. Used to predict each distinct input once while still summing
/// per-row results in the caller's order.
class RowPatterns {
 public:
  /// `rows` empty means all rows in index order; `keys` empty means every
  /// column.
  RowPatterns(const Dataset& data, std::span<const std::size_t> keys,
              std::span<const std::size_t> rows = {});

  std::size_t width() const noexcept { return width_; }
  std::size_t rows() const noexcept { return pattern_of_.size(); }
  std::size_t size() const noexcept { return width_ == 0 ? 0 : representatives_.size() / width_; }

  std::uint32_t pattern_of(std::size_t position) const noexcept { return pattern_of_[position]; }
  std::span<const std::uint32_t> mapping() const noexcept { return pattern_of_; }

  /// patterns x width, row-major.
  const std::vector<double>& representatives() const noexcept { return representatives_; }

 private:
  std::size_t width_;
  std::vector<double> representatives_;
  std::vector<std::uint32_t> pattern_of_;
};

}  // namespace rpdp
