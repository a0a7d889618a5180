#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rpdp/dataset.hpp"
#include "rpdp/forest.hpp"
#include "rpdp/row_patterns.hpp"

namespace rpdp {

inline constexpr std::size_t kDefaultGridPoints = 51;
inline constexpr double kDefaultCoverage = 0.95;

/// Evaluation points of one feature. Numeric points are strictly increasing;
/// categorical points are level codes in schema order.
struct Grid {
  std::string feature;
  std::size_t feature_index = 0;
  bool categorical = false;
  std::vector<double> points;
  /// Display form of each point (level name or shortest decimal).
  std::vector<std::string> labels;
  std::size_t max_points = kDefaultGridPoints;

  std::size_t size() const noexcept { return points.size(); }
  bool operator==(const Grid&) const = default;
};

/// Categorical: observed levels in schema order. Numeric: all distinct values
/// when there are at most max_points of them, otherwise max_points values at
/// evenly spaced probabilities k/(max_points-1) of the linear-interpolation
/// quantile, duplicates collapsed (first = min, last = max).
Grid make_grid(const Dataset& data, std::string_view feature,
               std::size_t max_points = kDefaultGridPoints);

struct Profile {
  std::size_t model_index = 0;
  std::string feature;
  std::optional<std::string> group_level;
  Grid grid;
  std::vector<double> values;
};

/// Precomputed view of a dataset's rows for profiling one feature.
///
/// Rows that agree on every other key column produce the same prediction at
/// a given grid value, so each distinct pattern is predicted once and the
/// results are then summed row by row in the caller's order. The sums are
/// therefore bit-identical to a plain per-row loop.
class PdpEvaluator {
 public:
  /// `keys` lists the columns a model may read (empty: all columns);
  /// `rows` empty means all rows of `data`, in index order.
  PdpEvaluator(const Dataset& data, std::size_t feature, std::span<const std::size_t> keys = {},
               std::span<const std::size_t> rows = {});

  std::size_t feature() const noexcept { return feature_; }
  std::size_t rows() const noexcept { return patterns_.rows(); }
  std::size_t patterns() const noexcept { return patterns_.size(); }

  /// values[s][k]: mean prediction over `subsets[s]` at grid point k.
  /// Subset entries are positions into this evaluator's row list. Throws
  /// Error(SchemaMismatch) if the model reads a column outside the keys.
  std::vector<std::vector<double>> evaluate(
      const Forest& model, const Grid& grid,
      std::span<const std::vector<std::size_t>> subsets) const;

 private:
  static std::vector<std::size_t> key_columns(const Dataset& data, std::size_t feature,
                                              std::span<const std::size_t> keys);

  std::size_t feature_;
  std::vector<bool> readable_;
  RowPatterns patterns_;
};

/// Mean prediction over `rows` with `feature` set to each grid value.
/// Throws Error(EmptySubset) for an empty row list.
Profile pdp(const Forest& model, const Dataset& data, std::span<const std::size_t> rows,
            std::string_view feature, const Grid& grid, std::size_t model_index = 0);

/// pdp over each level's rows of the categorical `group`, sharing `grid`.
/// Throws Error(GroupEqualsFeature) or Error(NotCategorical).
std::vector<Profile> grouped_pdp(const Forest& model, const Dataset& data,
                                 std::string_view feature, std::string_view group,
                                 const Grid& grid, std::size_t model_index = 0);

struct ProfileBand {
  std::string feature;
  std::optional<std::string> group_level;
  Grid grid;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
  double coverage = kDefaultCoverage;
  std::size_t members = 0;
};

/// Quantile of ascending `sorted` by linear interpolation between order
/// statistics at zero-based rank h = (m - 1) * p.
double quantile_sorted(std::span<const double> sorted, double p);

/// Pointwise mean and central `coverage` quantile interval across models.
/// The mean is clamped to the observed [min, max] and the interval widened
/// to contain the mean, so lower <= mean <= upper always holds.
/// Throws Error(EmptyInput) or Error(MixedGrids).
ProfileBand aggregate(std::span<const Profile> profiles, double coverage = kDefaultCoverage);

/// Lower-level form of aggregate over raw value rows (one per model).
void aggregate_point(std::span<double> values, double coverage, double& mean, double& lower,
                     double& upper);

}  // namespace rpdp
