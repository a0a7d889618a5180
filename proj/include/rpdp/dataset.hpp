#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rpdp/random.hpp"
#include "rpdp/schema.hpp"

namespace rpdp {

/// Immutable table of feature values and raw integer scores.
///
/// Feature values are stored row-major as doubles; a categorical cell holds
/// the index of its level in the schema. Each row also remembers which row
/// of the originally loaded table it came from, so resamples stay auditable.
class Dataset {
 public:
  /// `values` is rows x schema.width(), `scores` is rows x targets().size().
  /// An empty `source_rows` means rows are their own origin (0..n-1).
  /// Throws Error on any cell that violates the schema.
  Dataset(std::shared_ptr<const Schema> schema, std::vector<double> values,
          std::vector<int> scores, std::vector<std::size_t> source_rows = {});

  const Schema& schema() const noexcept { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const noexcept { return schema_; }

  std::size_t rows() const noexcept { return source_rows_.size(); }
  std::size_t width() const noexcept { return schema_->width(); }
  bool empty() const noexcept { return rows() == 0; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * width(), width()};
  }
  double value(std::size_t i, std::size_t feature) const { return values_[i * width() + feature]; }
  int score(std::size_t i, std::size_t target) const {
    return scores_[i * schema_->targets().size() + target];
  }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const int> scores() const noexcept { return scores_; }

  /// Row of the original table each row was copied from.
  std::span<const std::size_t> source_rows() const noexcept { return source_rows_; }

  /// Copies the listed rows (duplicates allowed) into a new dataset.
  Dataset select(std::span<const std::size_t> rows) const;

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<double> values_;
  std::vector<int> scores_;
  std::vector<std::size_t> source_rows_;
};

enum class ThresholdMode {
  Strict,     ///< positive iff score > threshold
  Inclusive,  ///< positive iff score >= threshold
};

struct TargetSpec {
  std::string column;
  int threshold = 3;
  ThresholdMode mode = ThresholdMode::Strict;
};

using Labels = std::vector<std::uint8_t>;

/// Reads a headered CSV whose columns are exactly the schema's features and
/// targets, in any order. Throws Error with the offending row/column.
Dataset load_csv(const std::string& path, std::shared_ptr<const Schema> schema);
Dataset read_csv(std::istream& in, std::shared_ptr<const Schema> schema);

/// Writes features then targets in schema order, LF line endings.
void write_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::string& path);

/// Binary outcome per row. Throws Error(UnknownTarget) or, for a threshold
/// outside the target's range, Error(InvalidConfig).
Labels binarize(const Dataset& data, const TargetSpec& spec);

/// n rows drawn uniformly with replacement, deterministic in `seed`.
/// Requires n >= 1.
Dataset bootstrap_sample(const Dataset& data, Seed seed);

/// Row indices (into `data`) drawn by bootstrap_sample for the same seed.
std::vector<std::size_t> bootstrap_indices(std::size_t n, Seed seed);

struct Partition {
  std::string level;
  std::size_t level_index = 0;
  std::vector<std::size_t> rows;  // ascending
};

/// One entry per observed level of a categorical feature, in schema order.
std::vector<Partition> partition_by(const Dataset& data, std::string_view group);
std::vector<Partition> partition_by(const Dataset& data, std::size_t group);

}  // namespace rpdp
