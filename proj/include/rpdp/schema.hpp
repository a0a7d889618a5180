#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rpdp {

enum class FeatureKind { Numeric, Categorical };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  /// Ordered level names; categorical features only.
  std::vector<std::string> levels;
  /// Optional inclusive bounds checked at ingestion; numeric features only.
  std::optional<double> min;
  std::optional<double> max;

  bool is_categorical() const noexcept { return kind == FeatureKind::Categorical; }
  bool operator==(const FeatureSpec&) const = default;
};

/// An integer-scored outcome column, e.g. a 0..6 screening subscale.
struct TargetRange {
  std::string name;
  int lo = 0;
  int hi = 0;
  bool operator==(const TargetRange&) const = default;
};

/// Column layout of a dataset: ordered features plus integer score columns.
///
/// Construction validates the invariants: unique nonempty names across
/// features and targets, nonempty duplicate-free level lists for categorical
/// features, lo <= hi for targets. Violations throw Error(InvalidSchema).
class Schema {
 public:
  Schema(std::vector<FeatureSpec> features, std::vector<TargetRange> targets);

  /// Parses {"features":[{"name","kind","levels"?,"min"?,"max"?}],
  ///         "targets":[{"name","lo","hi"}]}.
  static Schema from_json(std::string_view text);
  static Schema load(const std::string& path);
  std::string to_json() const;

  const std::vector<FeatureSpec>& features() const noexcept { return features_; }
  const std::vector<TargetRange>& targets() const noexcept { return targets_; }
  std::size_t width() const noexcept { return features_.size(); }

  std::optional<std::size_t> find_feature(std::string_view name) const;
  std::optional<std::size_t> find_target(std::string_view name) const;

  /// Throws Error(UnknownFeature).
  std::size_t feature_index(std::string_view name) const;
  /// Throws Error(UnknownTarget).
  std::size_t target_index(std::string_view name) const;

  std::optional<std::size_t> find_level(std::size_t feature, std::string_view level) const;

  /// Human-readable cell value: the level name for categorical features,
  /// shortest round-trip decimal otherwise.
  std::string format_value(std::size_t feature, double value) const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<FeatureSpec> features_;
  std::vector<TargetRange> targets_;
};

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace rpdp
