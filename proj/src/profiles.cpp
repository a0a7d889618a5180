#include "rpdp/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rpdp/error.hpp"

namespace rpdp {

namespace {

void check_grid(const Dataset& data, std::size_t feature, const Grid& grid) {
  const auto& spec = data.schema().features().at(feature);
  if (grid.feature != spec.name || grid.feature_index != feature) {
    throw Error(ErrorCode::MixedGrids,
                "grid for '" + grid.feature + "' used to profile '" + spec.name + "'");
  }
  if (grid.points.empty()) throw Error(ErrorCode::InvalidConfig, "grid has no points");
}

}  // namespace

Grid make_grid(const Dataset& data, std::string_view feature, std::size_t max_points) {
  const std::size_t j = data.schema().feature_index(feature);
  const auto& spec = data.schema().features()[j];
  if (max_points < 2) throw Error(ErrorCode::InvalidConfig, "grid needs at least 2 points");
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "cannot build a grid on no rows");

  Grid grid;
  grid.feature = spec.name;
  grid.feature_index = j;
  grid.categorical = spec.is_categorical();
  grid.max_points = max_points;

  if (spec.is_categorical()) {
    std::vector<bool> seen(spec.levels.size(), false);
    for (std::size_t i = 0; i < data.rows(); ++i) seen[static_cast<std::size_t>(data.value(i, j))] = true;
    for (std::size_t k = 0; k < seen.size(); ++k) {
      if (!seen[k]) continue;
      grid.points.push_back(static_cast<double>(k));
      grid.labels.push_back(spec.levels[k]);
    }
    return grid;
  }

  std::vector<double> sorted(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) sorted[i] = data.value(i, j);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() <= max_points) {
    grid.points = std::move(distinct);
  } else {
    for (std::size_t k = 0; k < max_points; ++k) {
      const double p = static_cast<double>(k) / static_cast<double>(max_points - 1);
      const double q = quantile_sorted(sorted, p);
      if (grid.points.empty() || q > grid.points.back()) grid.points.push_back(q);
    }
  }
  for (double v : grid.points) grid.labels.push_back(format_double(v));
  return grid;
}

std::vector<std::size_t> PdpEvaluator::key_columns(const Dataset& data, std::size_t feature,
                                                   std::span<const std::size_t> keys) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < data.width(); ++c) {
    if (c == feature) continue;
    if (keys.empty() || std::find(keys.begin(), keys.end(), c) != keys.end()) out.push_back(c);
  }
  return out;
}

PdpEvaluator::PdpEvaluator(const Dataset& data, std::size_t feature,
                           std::span<const std::size_t> keys, std::span<const std::size_t> rows)
    : feature_(feature),
      readable_(data.width(), keys.empty()),
      patterns_(data, key_columns(data, feature, keys), rows) {
  for (auto c : keys) readable_.at(c) = true;
  readable_.at(feature) = true;
}

std::vector<std::vector<double>> PdpEvaluator::evaluate(
    const Forest& model, const Grid& grid,
    std::span<const std::vector<std::size_t>> subsets) const {
  const std::size_t width = patterns_.width();
  if (model.schema().width() != width) {
    throw Error(ErrorCode::SchemaMismatch, "model and dataset schemas differ in width");
  }
  for (auto c : model.predictor_indices()) {
    if (!readable_[c]) {
      throw Error(ErrorCode::SchemaMismatch, "model reads a column the evaluator collapsed");
    }
  }
  for (const auto& subset : subsets) {
    if (subset.empty()) throw Error(ErrorCode::EmptySubset, "cannot profile an empty row subset");
  }
  std::vector<std::vector<double>> out(subsets.size(), std::vector<double>(grid.size()));
  std::vector<double> rows = patterns_.representatives();
  std::vector<double> predicted(patterns());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = grid.points[k];
    for (std::size_t q = 0; q < predicted.size(); ++q) {
      double* r = rows.data() + q * width;
      r[feature_] = v;
      predicted[q] = model.predict_unchecked({r, width});
    }
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      double sum = 0;
      for (std::size_t pos : subsets[s]) sum += predicted[patterns_.pattern_of(pos)];
      out[s][k] = sum / static_cast<double>(subsets[s].size());
    }
  }
  return out;
}

Profile pdp(const Forest& model, const Dataset& data, std::span<const std::size_t> rows,
            std::string_view feature, const Grid& grid, std::size_t model_index) {
  const std::size_t j = data.schema().feature_index(feature);
  check_grid(data, j, grid);
  if (rows.empty()) throw Error(ErrorCode::EmptySubset, "cannot profile an empty row subset");
  for (auto r : rows) {
    if (r >= data.rows()) throw Error(ErrorCode::OutOfRange, "row index out of range");
  }
  const PdpEvaluator evaluator(data, j, model.predictor_indices(), rows);
  std::vector<std::vector<std::size_t>> subsets(1, std::vector<std::size_t>(rows.size()));
  std::iota(subsets[0].begin(), subsets[0].end(), std::size_t{0});
  auto values = evaluator.evaluate(model, grid, subsets);
  return {model_index, grid.feature, std::nullopt, grid, std::move(values[0])};
}

std::vector<Profile> grouped_pdp(const Forest& model, const Dataset& data,
                                 std::string_view feature, std::string_view group,
                                 const Grid& grid, std::size_t model_index) {
  const std::size_t j = data.schema().feature_index(feature);
  const std::size_t g = data.schema().feature_index(group);
  if (j == g) throw Error(ErrorCode::GroupEqualsFeature, "group must differ from feature");
  check_grid(data, j, grid);
  const auto parts = partition_by(data, g);
  if (parts.empty()) throw Error(ErrorCode::EmptySubset, "cannot profile an empty dataset");

  const PdpEvaluator evaluator(data, j, model.predictor_indices());
  std::vector<std::vector<std::size_t>> subsets;
  for (const auto& part : parts) subsets.push_back(part.rows);
  auto values = evaluator.evaluate(model, grid, subsets);

  std::vector<Profile> out;
  for (std::size_t s = 0; s < parts.size(); ++s) {
    out.push_back({model_index, grid.feature, parts[s].level, grid, std::move(values[s])});
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of no values");
  p = std::clamp(p, 0.0, 1.0);
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double w = h - static_cast<double>(lo);
  return sorted[lo] + w * (sorted[lo + 1] - sorted[lo]);
}

void aggregate_point(std::span<double> values, double coverage, double& mean, double& lower,
                     double& upper) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "aggregate of no values");
  double sum = 0;
  for (double v : values) sum += v;
  std::sort(values.begin(), values.end());
  mean = std::clamp(sum / static_cast<double>(values.size()), values.front(), values.back());
  const double tail = (1.0 - coverage) / 2.0;
  lower = std::min(quantile_sorted(values, tail), mean);
  upper = std::max(quantile_sorted(values, 1.0 - tail), mean);
}

ProfileBand aggregate(std::span<const Profile> profiles, double coverage) {
  if (profiles.empty()) throw Error(ErrorCode::EmptyInput, "aggregate needs at least one profile");
  if (!(coverage > 0 && coverage < 1)) {
    throw Error(ErrorCode::InvalidConfig, "coverage must lie in (0, 1)");
  }
  const auto& first = profiles.front();
  for (const auto& p : profiles) {
    if (!(p.grid == first.grid) || p.group_level != first.group_level ||
        p.values.size() != first.grid.size()) {
      throw Error(ErrorCode::MixedGrids, "profiles differ in grid or group level");
    }
  }
  ProfileBand band;
  band.feature = first.feature;
  band.group_level = first.group_level;
  band.grid = first.grid;
  band.coverage = coverage;
  band.members = profiles.size();
  const std::size_t k_max = first.grid.size();
  band.mean.resize(k_max);
  band.lower.resize(k_max);
  band.upper.resize(k_max);
  std::vector<double> column(profiles.size());
  for (std::size_t k = 0; k < k_max; ++k) {
    for (std::size_t b = 0; b < profiles.size(); ++b) column[b] = profiles[b].values[k];
    aggregate_point(column, coverage, band.mean[k], band.lower[k], band.upper[k]);
  }
  return band;
}

}  // namespace rpdp
