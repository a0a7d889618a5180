#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "doctest.h"
#include "rpdp/error.hpp"
#include "rpdp/rashomon.hpp"
#include "test_util.hpp"

using namespace rpdp;

namespace {

struct Fixture {
  Dataset data;
  Labels labels;
};

Fixture fixture(Seed seed, std::size_t n) {
  SplitMix64 rng(seed);
  std::vector<double> values;
  Labels labels;
  for (std::size_t i = 0; i < n; ++i) {
    const double hour = static_cast<double>(uniform_index(rng, 24));
    const double age = 18 + static_cast<double>(uniform_index(rng, 60));
    const double sex = static_cast<double>(uniform_index(rng, 2));
    const double wk = static_cast<double>(uniform_index(rng, 2));
    values.insert(values.end(), {hour, age, sex, wk});
    labels.push_back(uniform01(rng) < 0.3 + 0.3 * (hour < 5) + 0.2 * wk ? 1 : 0);
  }
  return {Dataset(test::screening_schema(), values, std::vector<int>(n, 0)), labels};
}

RashomonConfig small_config(std::size_t b) {
  RashomonConfig cfg;
  cfg.iterations = b;
  cfg.forest.n_trees = 5;
  cfg.master_seed = 2024;
  return cfg;
}

RashomonSet with_briers(std::vector<double> briers) {
  RashomonSet set;
  for (std::size_t i = 0; i < briers.size(); ++i) {
    Member m;
    m.iteration = i + 1;
    m.metrics.brier = briers[i];
    m.metrics.accuracy = 1 - briers[i];
    set.members.push_back(m);
  }
  return set;
}

std::vector<std::size_t> iterations_of(const RashomonSet& set) {
  std::vector<std::size_t> out;
  for (const auto& m : set.members) out.push_back(m.iteration);
  return out;
}

bool same_member(const Member& a, const Member& b) {
  return a.iteration == b.iteration && a.bootstrap_seed == b.bootstrap_seed &&
         a.metrics.accuracy == b.metrics.accuracy && a.metrics.brier == b.metrics.brier &&
         a.metrics.positive_rate == b.metrics.positive_rate && *a.model == *b.model;
}

}  // namespace

TEST_SUITE("build_set") {
  TEST_CASE("B = 1 member metrics equal evaluating its forest") {
    const auto f = fixture(1, 300);
    const auto set = build_set(f.data, f.labels, small_config(1));
    REQUIRE(set.members.size() == 1);
    const Member& m = set.members[0];
    CHECK(m.iteration == 1);
    CHECK(m.bootstrap_seed == member_seed(2024, 1));
    const Metrics direct = evaluate(*m.model, f.data, f.labels);
    CHECK(m.metrics.accuracy == direct.accuracy);
    CHECK(m.metrics.brier == direct.brier);
    CHECK(m.metrics.positive_rate == direct.positive_rate);
  }

  TEST_CASE("member forest is trained on its bootstrap resample") {
    const auto f = fixture(2, 200);
    const auto cfg = small_config(2);
    const auto set = build_set(f.data, f.labels, cfg);
    for (const auto& m : set.members) {
      const auto idx = bootstrap_indices(f.data.rows(), m.bootstrap_seed);
      const Dataset sample = f.data.select(idx);
      Labels y;
      for (auto i : idx) y.push_back(f.labels[i]);
      ForestConfig fc = cfg.forest;
      fc.seed = m.bootstrap_seed;
      CHECK(*m.model == train_forest(sample, y, fc));
    }
  }

  TEST_CASE("same master seed reproduces the set") {
    const auto f = fixture(3, 250);
    const auto a = build_set(f.data, f.labels, small_config(6));
    const auto b = build_set(f.data, f.labels, small_config(6));
    REQUIRE(a.members.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(same_member(a.members[i], b.members[i]));
    auto other = small_config(6);
    other.master_seed = 2025;
    const auto c = build_set(f.data, f.labels, other);
    CHECK_FALSE(*a.members[0].model == *c.members[0].model);
  }

  TEST_CASE("members do not depend on build order or worker count") {
    const auto f = fixture(4, 250);
    const auto cfg = small_config(8);
    const auto serial = build_set(f.data, f.labels, cfg);
    BuildOptions opts;
    opts.workers = 4;
    const auto parallel = build_set(f.data, f.labels, cfg, opts);
    for (std::size_t b = 8; b >= 1; --b) {
      const Member alone = build_member(f.data, f.labels, cfg, b);
      CHECK(same_member(alone, serial.members[b - 1]));
      CHECK(same_member(alone, parallel.members[b - 1]));
    }
  }

  TEST_CASE("member seeds are injective over a million iterations") {
    std::vector<Seed> seeds;
    seeds.reserve(1000000);
    for (std::size_t b = 1; b <= 1000000; ++b) seeds.push_back(member_seed(7, b));
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
  }

  TEST_CASE("models can be discarded while a visitor sees each one") {
    const auto f = fixture(5, 200);
    BuildOptions opts;
    opts.keep_models = false;
    opts.workers = 3;
    std::mutex mu;
    std::vector<std::size_t> seen;
    opts.on_member = [&](const Member& m, const Forest& forest) {
      CHECK(forest.trees().size() == 5);
      std::lock_guard lock(mu);
      seen.push_back(m.iteration);
    };
    const auto set = build_set(f.data, f.labels, small_config(5), opts);
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<std::size_t>{1, 2, 3, 4, 5});
    for (const auto& m : set.members) CHECK(m.model == nullptr);
  }

  TEST_CASE("out-of-bag evaluation uses rows missing from the resample") {
    const auto f = fixture(6, 300);
    auto cfg = small_config(2);
    cfg.evaluation = MemberEvaluation::OutOfBag;
    const auto set = build_set(f.data, f.labels, cfg);
    for (const auto& m : set.members) {
      auto idx = bootstrap_indices(f.data.rows(), m.bootstrap_seed);
      std::vector<bool> in(f.data.rows(), false);
      for (auto i : idx) in[i] = true;
      std::vector<std::size_t> oob;
      for (std::size_t i = 0; i < in.size(); ++i)
        if (!in[i]) oob.push_back(i);
      Labels y;
      for (auto i : oob) y.push_back(f.labels[i]);
      const Metrics direct = evaluate(*m.model, f.data.select(oob), y);
      CHECK(m.metrics.brier == direct.brier);
      CHECK(m.metrics.accuracy == direct.accuracy);
    }
  }

  TEST_CASE("training failures name the iteration") {
    const auto f = fixture(7, 8);
    auto cfg = small_config(3);  // min_leaf 5 needs 10 rows
    try {
      build_set(f.data, f.labels, cfg);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooFewRows);
      CHECK(e.iteration() == 1);
      CHECK(std::string(e.what()).find("iteration 1") != std::string::npos);
    }
  }
}

TEST_SUITE("epsilon_filter") {
  TEST_CASE("worked example") {
    const auto set = with_briers({0.10, 0.11, 0.13});
    CHECK(iterations_of(epsilon_filter(set, 0.015)) == std::vector<std::size_t>{1, 2});
    CHECK(iterations_of(epsilon_filter(set, std::numeric_limits<double>::infinity())) ==
          std::vector<std::size_t>{1, 2, 3});
  }

  TEST_CASE("epsilon 0 keeps exactly the ties at the minimum") {
    const auto set = with_briers({0.2, 0.1, 0.3, 0.1});
    CHECK(iterations_of(epsilon_filter(set, 0)) == std::vector<std::size_t>{2, 4});
  }

  TEST_CASE("error-rate metric") {
    auto set = with_briers({0.10, 0.11, 0.13});
    set.config.epsilon_metric = EpsilonMetric::ErrorRate;  // error = brier here
    CHECK(iterations_of(epsilon_filter(set, 0.025)) == std::vector<std::size_t>{1, 2});
  }

  TEST_CASE("idempotent and monotone in epsilon") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> briers(1 + uniform_index(rng, 30));
      for (auto& b : briers) b = 0.1 + 0.1 * uniform01(rng);
      const auto set = with_briers(briers);
      const double e1 = 0.05 * uniform01(rng);
      const double e2 = e1 + 0.05 * uniform01(rng);
      const auto once = epsilon_filter(set, e1);
      CHECK(iterations_of(epsilon_filter(once, e1)) == iterations_of(once));
      const auto wider = iterations_of(epsilon_filter(set, e2));
      for (auto it : iterations_of(once)) {
        CHECK(std::find(wider.begin(), wider.end(), it) != wider.end());
      }
      CHECK_FALSE(once.members.empty());
    }
  }

  TEST_CASE("invalid input") {
    CHECK_THROWS_AS(epsilon_filter(RashomonSet{}, 0.1), Error);
    CHECK_THROWS_AS(epsilon_filter(with_briers({0.1}), -0.01), Error);
  }
}

TEST_SUITE("performance_spread") {
  TEST_CASE("worked example") {
    const auto spread = performance_spread(with_briers({0.10, 0.12, 0.14}));
    CHECK(spread.brier.min == 0.10);
    CHECK(spread.brier.max == 0.14);
    CHECK(spread.brier.mean == doctest::Approx(0.12).epsilon(1e-12));
    CHECK(spread.brier.stdev == doctest::Approx(0.02).epsilon(1e-9));
    CHECK(spread.accuracy.max == doctest::Approx(0.90).epsilon(1e-12));
  }

  TEST_CASE("single member has zero spread") {
    const auto spread = performance_spread(with_briers({0.2}));
    CHECK(spread.brier.stdev == 0);
    CHECK(spread.brier.min == spread.brier.max);
  }
}

TEST_CASE("members CSV") {
  auto set = with_briers({0.25, 0.125});
  set.members[0].bootstrap_seed = 17;
  std::ostringstream out;
  write_members_csv(set, out);
  const std::string text = out.str();
  CHECK(text.rfind("iteration,bootstrap_seed,accuracy,brier,positive_rate\n", 0) == 0);
  CHECK(text.find("\n1,17,0.75,0.25,0\n") != std::string::npos);
  CHECK(text.find("\n2,0,0.875,0.125,0\n") != std::string::npos);
}
