#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "rpdp/dataset.hpp"
#include "rpdp/forest.hpp"

namespace rpdp {

enum class EpsilonMetric { Brier, ErrorRate };

enum class MemberEvaluation {
  FullData,   ///< metrics on every row of the original dataset (default)
  OutOfBag,   ///< metrics on original rows absent from the member's resample
};

struct RashomonConfig {
  std::size_t iterations = 100;
  /// Hyperparameters shared by all members. Its seed is ignored: each member
  /// trains with its own derived seed.
  ForestConfig forest;
  Seed master_seed = 0;
  std::optional<double> epsilon;
  EpsilonMetric epsilon_metric = EpsilonMetric::Brier;
  MemberEvaluation evaluation = MemberEvaluation::FullData;
};

struct Member {
  std::size_t iteration = 0;  ///< 1-based
  Seed bootstrap_seed = 0;
  Metrics metrics;
  /// Null when the set was built without retaining models.
  std::shared_ptr<const Forest> model;
};

struct RashomonSet {
  std::vector<Member> members;
  RashomonConfig config;
};

/// Seed of iteration b (1-based): derive_seed(master, Stream::Bootstrap, b).
Seed member_seed(Seed master_seed, std::size_t iteration);

/// Resamples, trains and evaluates iteration `iteration` on its own.
/// `visit`, when set, sees the trained forest before it is (optionally)
/// released.
Member build_member(const Dataset& data, const Labels& labels, const RashomonConfig& config,
                    std::size_t iteration, bool keep_model = true,
                    const std::function<void(const Member&, const Forest&)>& visit = {});

struct BuildOptions {
  unsigned workers = 1;
  bool keep_models = true;
  /// Called once per member from the worker that built it.
  std::function<void(const Member&, const Forest&)> on_member;
};

/// Builds all B members. Output is identical for any worker count; members
/// are ordered by iteration. Training errors are rethrown tagged with the
/// failing iteration.
RashomonSet build_set(const Dataset& data, const Labels& labels, const RashomonConfig& config,
                      const BuildOptions& options = {});

double epsilon_metric_value(const Metrics& m, EpsilonMetric metric);

/// Keeps members whose metric is <= best + epsilon, in their original order.
RashomonSet epsilon_filter(const RashomonSet& set, double epsilon);

struct Spread {
  double min = 0;
  double max = 0;
  double mean = 0;
  double stdev = 0;  ///< sample standard deviation; 0 for a single member
};

struct PerformanceSpread {
  Spread accuracy;
  Spread brier;
  Spread positive_rate;
};

PerformanceSpread performance_spread(const RashomonSet& set);

/// CSV with columns iteration,bootstrap_seed,accuracy,brier,positive_rate.
void write_members_csv(const RashomonSet& set, std::ostream& out);

}  // namespace rpdp
