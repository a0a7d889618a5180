#include "rpdp/rashomon.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rpdp/error.hpp"
#include "rpdp/parallel.hpp"

namespace rpdp {

namespace {

Spread spread_of(const std::vector<double>& xs) {
  Spread s;
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stdev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace

Seed member_seed(Seed master_seed, std::size_t iteration) {
  return derive_seed(master_seed, Stream::Bootstrap, iteration);
}

Member build_member(const Dataset& data, const Labels& labels, const RashomonConfig& config,
                    std::size_t iteration, bool keep_model,
                    const std::function<void(const Member&, const Forest&)>& visit) {
  Member member;
  member.iteration = iteration;
  member.bootstrap_seed = member_seed(config.master_seed, iteration);
  try {
    const auto idx = bootstrap_indices(data.rows(), member.bootstrap_seed);
    const Dataset resample = data.select(idx);
    Labels resample_labels(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) resample_labels[i] = labels[idx[i]];

    ForestConfig fc = config.forest;
    fc.seed = member.bootstrap_seed;
    auto forest = std::make_shared<const Forest>(train_forest(resample, resample_labels, fc));

    if (config.evaluation == MemberEvaluation::FullData) {
      member.metrics = evaluate(*forest, data, labels);
    } else {
      std::vector<bool> drawn(data.rows(), false);
      for (auto i : idx) drawn[i] = true;
      std::vector<std::size_t> oob;
      for (std::size_t i = 0; i < data.rows(); ++i) {
        if (!drawn[i]) oob.push_back(i);
      }
      if (!oob.empty()) {
        Labels oob_labels(oob.size());
        for (std::size_t i = 0; i < oob.size(); ++i) oob_labels[i] = labels[oob[i]];
        member.metrics = evaluate(*forest, data.select(oob), oob_labels);
      }
    }
    if (visit) visit(member, *forest);
    if (keep_model) member.model = std::move(forest);
  } catch (const Error& e) {
    throw e.with_iteration(iteration);
  }
  return member;
}

RashomonSet build_set(const Dataset& data, const Labels& labels, const RashomonConfig& config,
                      const BuildOptions& options) {
  if (config.iterations < 1) throw Error(ErrorCode::InvalidConfig, "iterations must be >= 1");
  if (config.epsilon && !(*config.epsilon >= 0)) {
    throw Error(ErrorCode::InvalidConfig, "epsilon must be nonnegative");
  }
  if (labels.size() != data.rows()) {
    throw Error(ErrorCode::SchemaMismatch, "label vector length differs from row count");
  }
  RashomonSet set;
  set.config = config;
  set.members.resize(config.iterations);
  parallel_for(config.iterations, options.workers, [&](std::size_t slot) {
    set.members[slot] =
        build_member(data, labels, config, slot + 1, options.keep_models, options.on_member);
  });
  return set;
}

double epsilon_metric_value(const Metrics& m, EpsilonMetric metric) {
  return metric == EpsilonMetric::Brier ? m.brier : m.error_rate();
}

RashomonSet epsilon_filter(const RashomonSet& set, double epsilon) {
  if (set.members.empty()) throw Error(ErrorCode::EmptyInput, "epsilon filter on an empty set");
  if (!(epsilon >= 0)) throw Error(ErrorCode::InvalidConfig, "epsilon must be nonnegative");
  const auto metric = set.config.epsilon_metric;
  double best = epsilon_metric_value(set.members.front().metrics, metric);
  for (const auto& m : set.members) best = std::min(best, epsilon_metric_value(m.metrics, metric));
  const double cutoff = best + epsilon;
  RashomonSet out;
  out.config = set.config;
  for (const auto& m : set.members) {
    if (epsilon_metric_value(m.metrics, metric) <= cutoff) out.members.push_back(m);
  }
  return out;
}

PerformanceSpread performance_spread(const RashomonSet& set) {
  if (set.members.empty()) throw Error(ErrorCode::EmptyInput, "performance spread of an empty set");
  std::vector<double> acc, brier, rate;
  for (const auto& m : set.members) {
    acc.push_back(m.metrics.accuracy);
    brier.push_back(m.metrics.brier);
    rate.push_back(m.metrics.positive_rate);
  }
  return {spread_of(acc), spread_of(brier), spread_of(rate)};
}

void write_members_csv(const RashomonSet& set, std::ostream& out) {
  out << "iteration,bootstrap_seed,accuracy,brier,positive_rate\n";
  for (const auto& m : set.members) {
    out << m.iteration << ',' << m.bootstrap_seed << ',' << format_double(m.metrics.accuracy) << ','
        << format_double(m.metrics.brier) << ',' << format_double(m.metrics.positive_rate) << '\n';
  }
}

}  // namespace rpdp
