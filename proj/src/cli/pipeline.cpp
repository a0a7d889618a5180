#include <memory>

#include "rpdp/cli.hpp"
#include "rpdp/error.hpp"

namespace rpdp::cli {

namespace {

// Precomputed state for one (feature, group) pair, shared by all members.
struct PairPlan {
  ProfilePair pair;
  Grid grid;
  std::vector<std::optional<std::string>> levels;
  std::vector<std::vector<std::size_t>> subsets;
  std::unique_ptr<PdpEvaluator> evaluator;
};

}  // namespace

RunResult run_pipeline(const Dataset& data, const RunSpec& spec) {
  const Schema& schema = data.schema();
  const Labels labels = binarize(data, spec.target);
  const auto predictors = resolve_predictors(schema, spec.predictors);

  std::vector<PairPlan> plans;
  for (const auto& pair : spec.pairs) {
    PairPlan plan;
    plan.pair = pair;
    plan.grid = make_grid(data, pair.feature, spec.grid_points);
    if (pair.group) {
      if (*pair.group == pair.feature) {
        throw Error(ErrorCode::GroupEqualsFeature, "group must differ from feature");
      }
      for (auto& part : partition_by(data, *pair.group)) {
        plan.levels.push_back(part.level);
        plan.subsets.push_back(std::move(part.rows));
      }
    } else {
      plan.levels.push_back(std::nullopt);
      plan.subsets.emplace_back(data.rows());
      for (std::size_t i = 0; i < data.rows(); ++i) plan.subsets[0][i] = i;
    }
    plan.evaluator = std::make_unique<PdpEvaluator>(data, plan.grid.feature_index, predictors);
    plans.push_back(std::move(plan));
  }

  // values[b][pair][level][k]; each iteration writes only its own slot.
  const std::size_t B = spec.rashomon.iterations;
  std::vector<std::vector<std::vector<std::vector<double>>>> values(B);

  BuildOptions options;
  options.workers = spec.workers;
  options.keep_models = false;
  options.on_member = [&](const Member& member, const Forest& forest) {
    auto& slot = values[member.iteration - 1];
    slot.reserve(plans.size());
    for (const auto& plan : plans) slot.push_back(plan.evaluator->evaluate(forest, plan.grid, plan.subsets));
  };

  RunResult result;
  result.set = build_set(data, labels, spec.rashomon, options);

  std::vector<std::size_t> kept;
  if (spec.rashomon.epsilon) {
    for (const auto& m : epsilon_filter(result.set, *spec.rashomon.epsilon).members) {
      kept.push_back(m.iteration - 1);
    }
  } else {
    for (std::size_t b = 0; b < B; ++b) kept.push_back(b);
  }
  result.kept = kept.size();

  for (std::size_t p = 0; p < plans.size(); ++p) {
    const auto& plan = plans[p];
    PairBands pb;
    pb.pair = plan.pair;
    for (std::size_t l = 0; l < plan.levels.size(); ++l) {
      std::vector<Profile> profiles;
      profiles.reserve(kept.size());
      for (std::size_t b : kept) {
        profiles.push_back({b, plan.grid.feature, plan.levels[l], plan.grid, values[b][p][l]});
      }
      pb.bands.push_back(aggregate(profiles, spec.coverage));
    }
    result.bands.push_back(std::move(pb));
  }
  return result;
}

}  // namespace rpdp::cli
