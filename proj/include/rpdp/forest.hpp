#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpdp/dataset.hpp"
#include "rpdp/random.hpp"

namespace rpdp {

struct ForestConfig {
  std::size_t n_trees = 50;
  /// Features tried per split. Defaults to floor(sqrt(p)), p being the number
  /// of predictors that are not constant over the training rows.
  std::optional<std::size_t> mtry;
  std::size_t min_leaf = 5;
  std::optional<std::size_t> max_depth;
  Seed seed = 0;
  /// Feature names the trees may split on; empty means every schema feature.
  std::vector<std::string> predictors;
};

enum class SplitKind : std::uint8_t {
  Leaf,
  Numeric,      ///< value <= threshold goes left
  Categorical,  ///< value == level goes left, every other level (seen or not) right
};

struct Node {
  SplitKind kind = SplitKind::Leaf;
  std::int32_t feature = -1;
  /// Numeric threshold, or the level code for categorical splits.
  double threshold = 0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  /// Positive fraction of the (bagged) training rows reaching this node.
  double probability = 0;
  std::uint32_t support = 0;
  std::uint32_t positives = 0;

  bool is_leaf() const noexcept { return kind == SplitKind::Leaf; }
  bool operator==(const Node&) const = default;
};

/// CART classification tree stored as a flat preorder node array; node 0 is
/// the root.
class Tree {
 public:
  explicit Tree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> row) const noexcept {
    const Node* node = nodes_.data();
    while (node->kind != SplitKind::Leaf) {
      const double v = row[static_cast<std::size_t>(node->feature)];
      const bool go_left =
          node->kind == SplitKind::Numeric ? v <= node->threshold : v == node->threshold;
      node = nodes_.data() + (go_left ? node->left : node->right);
    }
    return node->probability;
  }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t leaf_count() const noexcept;
  std::size_t depth() const noexcept;

  bool operator==(const Tree&) const = default;

 private:
  std::vector<Node> nodes_;
};

/// Bagged random forest of CART trees; predicts the class-1 probability as
/// the plain mean of the trees' leaf fractions.
class Forest {
 public:
  Forest(std::vector<Tree> trees, ForestConfig config, std::shared_ptr<const Schema> schema);

  /// Throws Error(SchemaMismatch) when the row width differs from the schema.
  double predict_proba(std::span<const double> row) const;

  /// Skips the width check. `row` must hold schema().width() values.
  double predict_unchecked(std::span<const double> row) const noexcept {
    double sum = 0;
    for (const auto& tree : trees_) sum += tree.predict(row);
    return sum / static_cast<double>(trees_.size());
  }

  const std::vector<Tree>& trees() const noexcept { return trees_; }
  const ForestConfig& config() const noexcept { return config_; }
  /// Schema indices of the features the trees may split on, ascending.
  const std::vector<std::size_t>& predictor_indices() const noexcept { return predictors_; }
  const Schema& schema() const noexcept { return *schema_; }

  /// Nested-object JSON dump for inspection. Not a stable format.
  std::string to_json() const;

  bool operator==(const Forest& other) const { return trees_ == other.trees_; }

 private:
  std::vector<Tree> trees_;
  ForestConfig config_;
  std::shared_ptr<const Schema> schema_;
  std::vector<std::size_t> predictors_;
};

/// Schema indices named by `names` (all features when empty), ascending.
/// Throws Error(UnknownFeature) or, for repeats, Error(InvalidConfig).
std::vector<std::size_t> resolve_predictors(const Schema& schema,
                                            const std::vector<std::string>& names);

/// Grows config.n_trees trees, each on its own size-n resample of `data` with
/// mtry features drawn at every split and the split of largest Gini decrease
/// kept. Deterministic in (data, labels, config); `workers` only changes
/// wall time.
///
/// Throws Error(TooFewRows) when n < 2 * min_leaf, Error(InvalidConfig) for
/// out-of-range hyperparameters, Error(UnknownFeature) for bad predictors.
Forest train_forest(const Dataset& data, const Labels& labels, const ForestConfig& config,
                    unsigned workers = 1);

/// Row indices (into the training data) of the size-n resample tree `tree`
/// of a forest seeded with `forest_seed` is grown on.
std::vector<std::size_t> tree_bag(Seed forest_seed, std::size_t tree, std::size_t n);

struct Metrics {
  double accuracy = 0;       ///< at the 0.5 decision threshold (p > 0.5 is positive)
  double brier = 0;          ///< mean (p - y)^2
  double positive_rate = 0;  ///< fraction of rows predicted positive

  double error_rate() const noexcept { return 1.0 - accuracy; }
  bool operator==(const Metrics&) const = default;
};

Metrics evaluate(const Forest& forest, const Dataset& data, const Labels& labels);

}  // namespace rpdp
