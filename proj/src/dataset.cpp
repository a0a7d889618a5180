#include "rpdp/dataset.hpp"

#include <cmath>
#include <numeric>

#include "rpdp/error.hpp"

namespace rpdp {

Dataset::Dataset(std::shared_ptr<const Schema> schema, std::vector<double> values,
                 std::vector<int> scores, std::vector<std::size_t> source_rows)
    : schema_(std::move(schema)),
      values_(std::move(values)),
      scores_(std::move(scores)),
      source_rows_(std::move(source_rows)) {
  if (!schema_) throw Error(ErrorCode::InvalidSchema, "dataset requires a schema");
  const std::size_t p = schema_->width();
  const std::size_t t = schema_->targets().size();
  if (p == 0 && !values_.empty()) {
    throw Error(ErrorCode::SchemaMismatch, "schema has no features but values were given");
  }
  const std::size_t n = p > 0 ? values_.size() / p : scores_.size() / std::max<std::size_t>(t, 1);
  if (values_.size() != n * p || scores_.size() != n * t) {
    throw Error(ErrorCode::SchemaMismatch, "value/score buffers do not match the schema width");
  }
  if (source_rows_.empty()) {
    source_rows_.resize(n);
    std::iota(source_rows_.begin(), source_rows_.end(), std::size_t{0});
  } else if (source_rows_.size() != n) {
    throw Error(ErrorCode::SchemaMismatch, "source row list has the wrong length");
  }

  const auto& features = schema_->features();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double v = values_[i * p + j];
      const auto& f = features[j];
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFiniteNumeric,
                    "row " + std::to_string(i + 1) + ", column '" + f.name + "': non-finite value");
      }
      if (f.is_categorical()) {
        if (v < 0 || v != std::floor(v) || v >= static_cast<double>(f.levels.size())) {
          throw Error(ErrorCode::UnknownLevel, "row " + std::to_string(i + 1) + ", column '" +
                                                   f.name + "': invalid level code " +
                                                   format_double(v));
        }
      } else if ((f.min && v < *f.min) || (f.max && v > *f.max)) {
        throw Error(ErrorCode::OutOfRange, "row " + std::to_string(i + 1) + ", column '" +
                                               f.name + "': value " + format_double(v) +
                                               " outside declared range");
      }
    }
    for (std::size_t k = 0; k < t; ++k) {
      const int s = scores_[i * t + k];
      const auto& target = schema_->targets()[k];
      if (s < target.lo || s > target.hi) {
        throw Error(ErrorCode::OutOfRange, "row " + std::to_string(i + 1) + ", column '" +
                                               target.name + "': score " + std::to_string(s) +
                                               " outside " + std::to_string(target.lo) + ".." +
                                               std::to_string(target.hi));
      }
    }
  }
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  const std::size_t p = width();
  const std::size_t t = schema_->targets().size();
  std::vector<double> values;
  std::vector<int> scores;
  std::vector<std::size_t> sources;
  values.reserve(rows.size() * p);
  scores.reserve(rows.size() * t);
  sources.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= this->rows()) throw Error(ErrorCode::OutOfRange, "row index out of range");
    auto v = row(r);
    values.insert(values.end(), v.begin(), v.end());
    auto s = scores_.begin() + static_cast<std::ptrdiff_t>(r * t);
    scores.insert(scores.end(), s, s + static_cast<std::ptrdiff_t>(t));
    sources.push_back(source_rows_[r]);
  }
  return Dataset(schema_, std::move(values), std::move(scores), std::move(sources));
}

Labels binarize(const Dataset& data, const TargetSpec& spec) {
  const std::size_t t = data.schema().target_index(spec.column);
  const auto& range = data.schema().targets()[t];
  if (spec.threshold < range.lo || spec.threshold > range.hi) {
    throw Error(ErrorCode::InvalidConfig,
                "threshold " + std::to_string(spec.threshold) + " outside the range of '" +
                    spec.column + "'");
  }
  Labels labels(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const int s = data.score(i, t);
    const bool positive =
        spec.mode == ThresholdMode::Strict ? s > spec.threshold : s >= spec.threshold;
    labels[i] = positive ? 1 : 0;
  }
  return labels;
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, Seed seed) {
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "cannot resample an empty dataset");
  SplitMix64 rng(seed);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = static_cast<std::size_t>(uniform_index(rng, n));
  return idx;
}

Dataset bootstrap_sample(const Dataset& data, Seed seed) {
  const auto idx = bootstrap_indices(data.rows(), seed);
  return data.select(idx);
}

std::vector<Partition> partition_by(const Dataset& data, std::string_view group) {
  return partition_by(data, data.schema().feature_index(group));
}

std::vector<Partition> partition_by(const Dataset& data, std::size_t group) {
  const auto& f = data.schema().features().at(group);
  if (!f.is_categorical()) {
    throw Error(ErrorCode::NotCategorical, "feature '" + f.name + "' is not categorical");
  }
  std::vector<std::vector<std::size_t>> buckets(f.levels.size());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    buckets[static_cast<std::size_t>(data.value(i, group))].push_back(i);
  }
  std::vector<Partition> out;
  for (std::size_t k = 0; k < buckets.size(); ++k) {
    if (buckets[k].empty()) continue;
    out.push_back({f.levels[k], k, std::move(buckets[k])});
  }
  return out;
}

}  // namespace rpdp
