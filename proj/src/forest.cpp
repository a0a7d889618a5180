#include "rpdp/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "rpdp/error.hpp"
#include "rpdp/parallel.hpp"
#include "rpdp/row_patterns.hpp"

namespace rpdp {

namespace {

using u128 = unsigned __int128;

// Weighted Gini impurity of a split, up to the constant factor 2, as an exact
// fraction:  pl*ql/nl + pr*qr/nr  =  (pl*ql*nr + pr*qr*nl) / (nl*nr).
// Smaller is better. Integer arithmetic makes ties exact, which keeps the
// tie-breaking rule deterministic and class-symmetric.
struct SplitScore {
  u128 num = 0;
  u128 den = 1;

  static SplitScore of(std::uint64_t nl, std::uint64_t pl, std::uint64_t nr, std::uint64_t pr) {
    const u128 ql = nl - pl;
    const u128 qr = nr - pr;
    return {u128(pl) * ql * nr + u128(pr) * qr * nl, u128(nl) * nr};
  }

  bool operator<(const SplitScore& o) const { return num * o.den < o.num * den; }
};

// Per-predictor discretization of the training rows. Numeric features map to
// the rank of their value among the distinct observed values; categorical
// features map to the level code.
struct BinnedFeature {
  std::size_t feature = 0;
  bool categorical = false;
  std::vector<double> cut_values;  // distinct sorted values (numeric)
  std::vector<std::uint32_t> bins;  // one per training row
  std::size_t n_bins = 0;
};

struct Candidate {
  bool found = false;
  SplitScore score;
  std::size_t slot = 0;  // index into the binned feature list
  std::uint32_t bin = 0;  // numeric: last bin going left; categorical: level
  double threshold = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<BinnedFeature>& features, const Labels& labels,
              const ForestConfig& config, std::size_t mtry)
      : features_(features), labels_(labels), config_(config), mtry_(mtry) {}

  // The bag draws come first on the tree's stream; tree_bag() replays them.
  Tree grow(Seed seed) {
    SplitMix64 rng(seed);
    const std::size_t n = labels_.size();
    std::vector<std::uint32_t> bag(n);
    for (auto& r : bag) r = static_cast<std::uint32_t>(uniform_index(rng, n));
    nodes_.clear();
    build(rng, bag, 0, n, 0);
    return Tree(std::move(nodes_));
  }

 private:
  std::int32_t build(SplitMix64& rng, std::vector<std::uint32_t>& rows, std::size_t begin,
                     std::size_t end, std::size_t depth) {
    const std::size_t n = end - begin;
    std::uint64_t pos = 0;
    for (std::size_t i = begin; i < end; ++i) pos += labels_[rows[i]];

    const auto id = static_cast<std::int32_t>(nodes_.size());
    Node node;
    node.support = static_cast<std::uint32_t>(n);
    node.positives = static_cast<std::uint32_t>(pos);
    node.probability = static_cast<double>(pos) / static_cast<double>(n);
    nodes_.push_back(node);

    const bool pure = pos == 0 || pos == n;
    const bool capped = config_.max_depth && depth >= *config_.max_depth;
    if (pure || n < 2 * config_.min_leaf || capped || mtry_ == 0) return id;

    const Candidate best = find_split(rng, rows, begin, end, pos);
    if (!best.found) return id;

    const auto& bf = features_[best.slot];
    auto goes_left = [&](std::uint32_t r) {
      return bf.categorical ? bf.bins[r] == best.bin : bf.bins[r] <= best.bin;
    };
    const auto mid = static_cast<std::size_t>(
        std::partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                       rows.begin() + static_cast<std::ptrdiff_t>(end), goes_left) -
        rows.begin());

    nodes_[static_cast<std::size_t>(id)].kind =
        bf.categorical ? SplitKind::Categorical : SplitKind::Numeric;
    nodes_[static_cast<std::size_t>(id)].feature = static_cast<std::int32_t>(bf.feature);
    nodes_[static_cast<std::size_t>(id)].threshold = best.threshold;
    const auto left = build(rng, rows, begin, mid, depth + 1);
    const auto right = build(rng, rows, mid, end, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  Candidate find_split(SplitMix64& rng, const std::vector<std::uint32_t>& rows, std::size_t begin,
                       std::size_t end, std::uint64_t pos) {
    // Partial Fisher-Yates draw of mtry predictor slots, then ascending order
    // so that equal scores resolve to the lowest feature index.
    slots_.resize(features_.size());
    for (std::size_t k = 0; k < slots_.size(); ++k) slots_[k] = k;
    for (std::size_t k = 0; k < mtry_; ++k) {
      const auto pick = k + static_cast<std::size_t>(uniform_index(rng, slots_.size() - k));
      std::swap(slots_[k], slots_[pick]);
    }
    std::sort(slots_.begin(), slots_.begin() + static_cast<std::ptrdiff_t>(mtry_));

    const std::uint64_t n = end - begin;
    // Parent impurity in the same units: pos*neg/n.
    const SplitScore parent{u128(pos) * (n - pos), n};
    Candidate best;
    best.score = parent;
    for (std::size_t k = 0; k < mtry_; ++k) {
      const std::size_t slot = slots_[k];
      const auto& bf = features_[slot];
      tally(bf, rows, begin, end);
      if (bf.categorical) {
        for (std::uint32_t b : touched_) {
          const std::uint64_t nl = count_[b];
          const std::uint64_t pl = positive_[b];
          if (nl < config_.min_leaf || n - nl < config_.min_leaf) continue;
          const auto score = SplitScore::of(nl, pl, n - nl, pos - pl);
          if (score < best.score) best = {true, score, slot, b, static_cast<double>(b)};
        }
      } else {
        std::uint64_t nl = 0;
        std::uint64_t pl = 0;
        for (std::size_t t = 0; t + 1 < touched_.size(); ++t) {
          const std::uint32_t b = touched_[t];
          nl += count_[b];
          pl += positive_[b];
          if (nl < config_.min_leaf) continue;
          if (n - nl < config_.min_leaf) break;
          const auto score = SplitScore::of(nl, pl, n - nl, pos - pl);
          if (score < best.score) {
            const double lo = bf.cut_values[b];
            const double hi = bf.cut_values[touched_[t + 1]];
            double threshold = lo + (hi - lo) / 2;
            if (!(threshold < hi)) threshold = lo;
            best = {true, score, slot, b, threshold};
          }
        }
      }
      for (std::uint32_t b : touched_) {
        count_[b] = 0;
        positive_[b] = 0;
      }
    }
    return best;
  }

  // Fills count_/positive_ for the node's rows and lists the nonempty bins in
  // ascending order in touched_.
  void tally(const BinnedFeature& bf, const std::vector<std::uint32_t>& rows, std::size_t begin,
             std::size_t end) {
    if (count_.size() < bf.n_bins) {
      count_.resize(bf.n_bins, 0);
      positive_.resize(bf.n_bins, 0);
    }
    touched_.clear();
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = rows[i];
      const auto b = bf.bins[r];
      if (count_[b]++ == 0) touched_.push_back(b);
      positive_[b] += labels_[r];
    }
    // Sort the touched list when it is short relative to the bin range,
    // otherwise rebuild it with a sweep.
    if (touched_.size() * 8 < bf.n_bins) {
      std::sort(touched_.begin(), touched_.end());
    } else {
      touched_.clear();
      for (std::uint32_t b = 0; b < bf.n_bins; ++b) {
        if (count_[b] != 0) touched_.push_back(b);
      }
    }
  }

  const std::vector<BinnedFeature>& features_;
  const Labels& labels_;
  const ForestConfig& config_;
  std::size_t mtry_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> slots_;
  std::vector<std::uint32_t> count_;
  std::vector<std::uint32_t> positive_;
  std::vector<std::uint32_t> touched_;
};

BinnedFeature bin_feature(const Dataset& data, std::size_t j) {
  BinnedFeature bf;
  bf.feature = j;
  const auto& spec = data.schema().features()[j];
  const std::size_t n = data.rows();
  bf.bins.resize(n);
  if (spec.is_categorical()) {
    bf.categorical = true;
    bf.n_bins = spec.levels.size();
    for (std::size_t i = 0; i < n; ++i) bf.bins[i] = static_cast<std::uint32_t>(data.value(i, j));
    return bf;
  }
  bf.cut_values.resize(n);
  for (std::size_t i = 0; i < n; ++i) bf.cut_values[i] = data.value(i, j);
  std::sort(bf.cut_values.begin(), bf.cut_values.end());
  bf.cut_values.erase(std::unique(bf.cut_values.begin(), bf.cut_values.end()),
                      bf.cut_values.end());
  bf.n_bins = bf.cut_values.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = std::lower_bound(bf.cut_values.begin(), bf.cut_values.end(), data.value(i, j));
    bf.bins[i] = static_cast<std::uint32_t>(it - bf.cut_values.begin());
  }
  return bf;
}

bool is_constant(const Dataset& data, std::size_t j) {
  for (std::size_t i = 1; i < data.rows(); ++i) {
    if (data.value(i, j) != data.value(0, j)) return false;
  }
  return true;
}

void node_to_json(const Tree& tree, std::int32_t id, const Schema& schema, nlohmann::json& out) {
  const Node& node = tree.nodes()[static_cast<std::size_t>(id)];
  out["support"] = node.support;
  out["probability"] = node.probability;
  if (node.is_leaf()) return;
  const auto f = static_cast<std::size_t>(node.feature);
  out["feature"] = schema.features()[f].name;
  if (node.kind == SplitKind::Numeric) {
    out["threshold"] = node.threshold;
  } else {
    out["level"] = schema.format_value(f, node.threshold);
  }
  node_to_json(tree, node.left, schema, out["left"]);
  node_to_json(tree, node.right, schema, out["right"]);
}

}  // namespace

std::vector<std::size_t> resolve_predictors(const Schema& schema,
                                            const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  if (names.empty()) {
    for (std::size_t j = 0; j < schema.width(); ++j) out.push_back(j);
    return out;
  }
  for (const auto& name : names) out.push_back(schema.feature_index(name));
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw Error(ErrorCode::InvalidConfig, "predictor list repeats a feature");
  }
  return out;
}

std::size_t Tree::leaf_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::size_t Tree::depth() const noexcept {
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (nodes_[i].is_leaf()) continue;
    depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
    depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
  }
  return deepest;
}

Forest::Forest(std::vector<Tree> trees, ForestConfig config, std::shared_ptr<const Schema> schema)
    : trees_(std::move(trees)), config_(std::move(config)), schema_(std::move(schema)) {
  if (trees_.empty()) throw Error(ErrorCode::InvalidConfig, "forest needs at least one tree");
  predictors_ = resolve_predictors(*schema_, config_.predictors);
}

double Forest::predict_proba(std::span<const double> row) const {
  if (row.size() != schema_->width()) {
    throw Error(ErrorCode::SchemaMismatch, "row has " + std::to_string(row.size()) +
                                               " values, schema has " +
                                               std::to_string(schema_->width()) + " features");
  }
  return predict_unchecked(row);
}

std::string Forest::to_json() const {
  nlohmann::json doc;
  doc["n_trees"] = trees_.size();
  doc["seed"] = config_.seed;
  doc["min_leaf"] = config_.min_leaf;
  doc["trees"] = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json root;
    node_to_json(tree, 0, *schema_, root);
    doc["trees"].push_back(std::move(root));
  }
  return doc.dump(2);
}

Forest train_forest(const Dataset& data, const Labels& labels, const ForestConfig& config,
                    unsigned workers) {
  const std::size_t n = data.rows();
  if (labels.size() != n) {
    throw Error(ErrorCode::SchemaMismatch, "label vector length differs from row count");
  }
  if (config.n_trees < 1) throw Error(ErrorCode::InvalidConfig, "n_trees must be >= 1");
  if (config.min_leaf < 1) throw Error(ErrorCode::InvalidConfig, "min_leaf must be >= 1");
  if (n < 2 * config.min_leaf) {
    throw Error(ErrorCode::TooFewRows, std::to_string(n) + " rows cannot form two leaves of " +
                                           std::to_string(config.min_leaf));
  }
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidConfig, "too many rows for one forest");
  }
  const auto predictors = resolve_predictors(data.schema(), config.predictors);
  if (config.mtry && (*config.mtry < 1 || *config.mtry > predictors.size())) {
    throw Error(ErrorCode::InvalidConfig, "mtry must lie in 1.." + std::to_string(predictors.size()));
  }

  // Constant predictors can never yield a split; dropping them up front keeps
  // the per-split feature draw identical whether or not they are present.
  std::vector<BinnedFeature> features;
  for (std::size_t j : predictors) {
    if (!is_constant(data, j)) features.push_back(bin_feature(data, j));
  }
  std::size_t mtry = config.mtry.value_or(
      static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(features.size())))));
  mtry = std::min(std::max<std::size_t>(mtry, features.empty() ? 0 : 1), features.size());

  std::vector<std::optional<Tree>> grown(config.n_trees);
  parallel_for(config.n_trees, workers, [&](std::size_t t) {
    TreeBuilder builder(features, labels, config, mtry);
    grown[t] = builder.grow(derive_seed(config.seed, Stream::Tree, t));
  });
  std::vector<Tree> trees;
  trees.reserve(grown.size());
  for (auto& t : grown) trees.push_back(std::move(*t));
  return Forest(std::move(trees), config, data.schema_ptr());
}

std::vector<std::size_t> tree_bag(Seed forest_seed, std::size_t tree, std::size_t n) {
  SplitMix64 rng(derive_seed(forest_seed, Stream::Tree, tree));
  std::vector<std::size_t> bag(n);
  for (auto& r : bag) r = static_cast<std::size_t>(uniform_index(rng, n));
  return bag;
}

Metrics evaluate(const Forest& forest, const Dataset& data, const Labels& labels) {
  if (labels.size() != data.rows()) {
    throw Error(ErrorCode::SchemaMismatch, "label vector length differs from row count");
  }
  if (data.empty()) return {};
  if (data.width() != forest.schema().width()) {
    throw Error(ErrorCode::SchemaMismatch, "dataset and forest schemas differ in width");
  }
  // Rows that agree on every predictor get the same prediction; compute each
  // once, then accumulate in row order.
  const RowPatterns patterns(data, forest.predictor_indices());
  std::vector<double> predicted(patterns.size());
  const auto& reps = patterns.representatives();
  for (std::size_t q = 0; q < predicted.size(); ++q) {
    predicted[q] = forest.predict_unchecked({reps.data() + q * data.width(), data.width()});
  }
  std::size_t correct = 0;
  std::size_t predicted_positive = 0;
  double squared = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double p = predicted[patterns.pattern_of(i)];
    const bool positive = p > 0.5;
    predicted_positive += positive;
    correct += positive == (labels[i] != 0);
    const double d = p - labels[i];
    squared += d * d;
  }
  const double n = static_cast<double>(data.rows());
  return {static_cast<double>(correct) / n, squared / n, static_cast<double>(predicted_positive) / n};
}

}  // namespace rpdp
