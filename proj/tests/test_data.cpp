#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rpdp/dataset.hpp"
#include "rpdp/error.hpp"
#include "test_util.hpp"

using namespace rpdp;
using rpdp::test::TempDir;

namespace {

ErrorCode load_error(const std::string& text) {
  std::istringstream in(text);
  try {
    read_csv(in, test::screening_schema());
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected load failure");
  return ErrorCode::Io;
}

Dataset small(std::initializer_list<std::array<double, 4>> rows, std::vector<int> scores) {
  std::vector<double> values;
  for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
  return Dataset(test::screening_schema(), values, std::move(scores));
}

// Survey-count fixture: 34,443 rows whose sex and weekday/weekend columns carry the
// survey level counts. Assignment is by index so counts are exact.
std::string table1_csv() {
  constexpr int n = 34443;
  std::ostringstream out;
  out << "sex,weekday_weekend,age,hour,gad2\n";
  for (int i = 0; i < n; ++i) {
    const bool female = i < 28781;
    const bool weekday = (static_cast<long>(i) * 7919 % n) < 26186;
    out << (female ? "female" : "male") << ',' << (weekday ? "weekday" : "weekend") << ','
        << 18 + i % 60 << ',' << i % 24 << ',' << i % 7 << '\n';
  }
  return out.str();
}

}  // namespace

TEST_SUITE("schema") {
  TEST_CASE("rejects malformed declarations") {
    auto bad = [](std::vector<FeatureSpec> f, std::vector<TargetRange> t = {}) {
      CHECK_THROWS_AS(Schema(std::move(f), std::move(t)), Error);
    };
    bad({{"a"}, {"a"}});
    bad({{""}});
    bad({{"c", FeatureKind::Categorical, {}}});
    bad({{"c", FeatureKind::Categorical, {"x", "x"}}});
    bad({{"a"}}, {{"a", 0, 6}});
    bad({{"a"}}, {{"t", 6, 0}});
  }

  TEST_CASE("JSON round trip") {
    const auto text = R"({"features":[
        {"name":"hour","kind":"numeric","min":0,"max":23},
        {"name":"sex","kind":"categorical","levels":["female","male"]}],
      "targets":[{"name":"gad2","lo":0,"hi":6}]})";
    const Schema s = Schema::from_json(text);
    CHECK(s.width() == 2);
    CHECK(s.features()[1].levels == std::vector<std::string>{"female", "male"});
    CHECK(*s.features()[0].max == 23);
    CHECK(Schema::from_json(s.to_json()) == s);
  }

  TEST_CASE("unknown kind is a schema error") {
    try {
      Schema::from_json(R"({"features":[{"name":"a","kind":"ordinal"}]})");
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidSchema);
    }
  }
}

TEST_SUITE("load_csv") {
  TEST_CASE("loads a valid file with shuffled columns") {
    std::istringstream in(
        "sex,hour,gad2,weekday_weekend,age\n"
        "female,2,4,weekend,33\n"
        "male,13.5,0,weekday,71\n");
    const Dataset d = read_csv(in, test::screening_schema());
    REQUIRE(d.rows() == 2);
    CHECK(d.value(0, 0) == 2);
    CHECK(d.value(1, 0) == 13.5);
    CHECK(d.value(1, 2) == 1);  // male
    CHECK(d.value(0, 3) == 1);  // weekend
    CHECK(d.score(0, 0) == 4);
  }

  TEST_CASE("hour outside 0..23 is rejected") {
    CHECK(load_error("hour,age,sex,weekday_weekend,gad2\n"
                     "1,30,female,weekday,2\n"
                     "25,30,female,weekday,2\n"
                     "3,30,male,weekend,2\n") == ErrorCode::OutOfRange);
  }

  TEST_CASE("header only is an empty dataset") {
    CHECK(load_error("hour,age,sex,weekday_weekend,gad2\n") == ErrorCode::EmptyDataset);
  }

  TEST_CASE("named failure modes") {
    CHECK(load_error("hour,age,sex,gad2\n1,30,female,2\n") == ErrorCode::MissingColumn);
    CHECK(load_error("hour,age,sex,weekday_weekend,gad2,zip\n1,30,female,weekday,2,9\n") ==
          ErrorCode::UnknownColumn);
    CHECK(load_error("hour,age,sex,weekday_weekend,gad2\n1,30,other,weekday,2\n") ==
          ErrorCode::UnknownLevel);
    CHECK(load_error("hour,age,sex,weekday_weekend,gad2\nnan,30,female,weekday,2\n") ==
          ErrorCode::NonFiniteNumeric);
    CHECK(load_error("hour,age,sex,weekday_weekend,gad2\ninf,30,female,weekday,2\n") ==
          ErrorCode::NonFiniteNumeric);
    CHECK(load_error("hour,age,sex,weekday_weekend,gad2\n,30,female,weekday,2\n") ==
          ErrorCode::MissingValue);
    CHECK(load_error("hour,age,sex,weekday_weekend,gad2\n1,30,female,weekday,7\n") ==
          ErrorCode::OutOfRange);
    CHECK(load_error("hour,age,sex,weekday_weekend,gad2\n1,abc,female,weekday,2\n") ==
          ErrorCode::InvalidNumeric);
  }

  TEST_CASE("error message names row and column") {
    std::istringstream in("hour,age,sex,weekday_weekend,gad2\n1,30,female,weekday,2\n"
                          "2,31,unknown,weekday,2\n");
    try {
      read_csv(in, test::screening_schema());
      FAIL("no throw");
    } catch (const Error& e) {
      const std::string what = e.what();
      CHECK(what.find("row 2") != std::string::npos);
      CHECK(what.find("'sex'") != std::string::npos);
      CHECK(what.find("unknown") != std::string::npos);
    }
  }

  TEST_CASE("survey-count fixture level counts") {
    TempDir dir;
    test::write_file(dir.file("t1.csv"), table1_csv());
    const Dataset d = load_csv(dir.file("t1.csv"), test::screening_schema());
    REQUIRE(d.rows() == 34443);
    std::size_t female = 0;
    for (std::size_t i = 0; i < d.rows(); ++i) female += d.value(i, 2) == 0;
    CHECK(female == 28781);
    CHECK(d.rows() - female == 5662);

    const auto parts = partition_by(d, "weekday_weekend");
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].level == "weekday");
    CHECK(parts[0].rows.size() == 26186);
    CHECK(parts[1].rows.size() == 8257);
  }

  TEST_CASE("load, write, load round-trips bit-identically") {
    // Property over random tables, including awkward doubles.
    auto schema = test::screening_schema();
    SplitMix64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 1 + uniform_index(rng, 40);
      std::vector<double> values;
      std::vector<int> scores;
      for (std::size_t i = 0; i < n; ++i) {
        values.push_back(23.0 * uniform01(rng));
        values.push_back(18.0 + std::nextafter(uniform01(rng) * 82.0, 0.0));
        values.push_back(static_cast<double>(uniform_index(rng, 2)));
        values.push_back(static_cast<double>(uniform_index(rng, 2)));
        scores.push_back(static_cast<int>(uniform_index(rng, 7)));
      }
      const Dataset original(schema, values, scores);
      std::ostringstream first;
      write_csv(original, first);
      std::istringstream in(first.str());
      const Dataset reloaded = read_csv(in, schema);
      REQUIRE(reloaded.rows() == n);
      for (std::size_t k = 0; k < values.size(); ++k) {
        CHECK(std::bit_cast<std::uint64_t>(reloaded.values()[k]) ==
              std::bit_cast<std::uint64_t>(values[k]));
      }
      CHECK(std::equal(scores.begin(), scores.end(), reloaded.scores().begin()));
      std::ostringstream second;
      write_csv(reloaded, second);
      CHECK(second.str() == first.str());
    }
  }
}

TEST_SUITE("binarize") {
  const Dataset d = small({{1, 30, 0, 0}, {1, 30, 0, 0}, {1, 30, 0, 0}, {1, 30, 0, 0}},
                          {3, 0, 4, 6});

  TEST_CASE("strict and inclusive at the cut-off") {
    const auto strict = binarize(d, {"gad2", 3, ThresholdMode::Strict});
    const auto inclusive = binarize(d, {"gad2", 3, ThresholdMode::Inclusive});
    CHECK(strict[0] == 0);
    CHECK(inclusive[0] == 1);
    CHECK(strict[1] == 0);
    CHECK(inclusive[1] == 0);
    CHECK(strict == Labels{0, 0, 1, 1});
    CHECK(inclusive == Labels{1, 0, 1, 1});
  }

  TEST_CASE("default mode is strict") { CHECK(TargetSpec{"gad2"}.mode == ThresholdMode::Strict); }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(binarize(d, {"phq2", 3}), Error);
    try {
      binarize(d, {"phq2", 3});
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownTarget);
    }
    try {
      binarize(d, {"gad2", 9});
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidConfig);
    }
  }

  TEST_CASE("monotone in the raw score") {
    std::vector<double> values;
    std::vector<int> scores;
    for (int s = 0; s <= 6; ++s) {
      values.insert(values.end(), {1, 30, 0, 0});
      scores.push_back(s);
    }
    const Dataset all(test::screening_schema(), values, scores);
    for (int threshold = 0; threshold <= 6; ++threshold) {
      for (auto mode : {ThresholdMode::Strict, ThresholdMode::Inclusive}) {
        const auto labels = binarize(all, {"gad2", threshold, mode});
        CHECK(std::is_sorted(labels.begin(), labels.end()));
      }
    }
  }
}

TEST_SUITE("bootstrap_sample") {
  TEST_CASE("n = 1 repeats the only row") {
    const Dataset d = small({{5, 40, 1, 0}}, {2});
    const Dataset b = bootstrap_sample(d, 1234);
    REQUIRE(b.rows() == 1);
    CHECK(b.source_rows()[0] == 0);
    CHECK(b.value(0, 0) == 5);
  }

  TEST_CASE("deterministic and size-preserving") {
    std::vector<double> values;
    std::vector<int> scores;
    for (int i = 0; i < 57; ++i) {
      values.insert(values.end(), {static_cast<double>(i % 24), 30, 0, 0});
      scores.push_back(i % 7);
    }
    const Dataset d(test::screening_schema(), values, scores);
    for (Seed seed : {0ULL, 1ULL, 0xFFFFFFFFFFFFFFFFULL}) {
      const Dataset a = bootstrap_sample(d, seed);
      const Dataset b = bootstrap_sample(d, seed);
      CHECK(a.rows() == d.rows());
      CHECK(std::equal(a.source_rows().begin(), a.source_rows().end(), b.source_rows().begin()));
      for (std::size_t i = 0; i < a.rows(); ++i) {
        CHECK(a.value(i, 0) == d.value(a.source_rows()[i], 0));
      }
    }
    CHECK_FALSE(std::equal(bootstrap_sample(d, 1).source_rows().begin(),
                           bootstrap_sample(d, 1).source_rows().end(),
                           bootstrap_sample(d, 2).source_rows().begin()));
  }

  TEST_CASE("resampling a resample keeps original provenance") {
    const Dataset d = small({{1, 20, 0, 0}, {2, 21, 0, 0}, {3, 22, 1, 1}}, {0, 1, 2});
    const Dataset once = bootstrap_sample(d, 7);
    const Dataset twice = bootstrap_sample(once, 8);
    for (std::size_t i = 0; i < twice.rows(); ++i) {
      CHECK(twice.value(i, 0) == d.value(twice.source_rows()[i], 0));
    }
  }

  TEST_CASE("distinct-row fraction follows 1 - (1 - 1/n)^n") {
    constexpr std::size_t n = 10000;
    const double expected = 1.0 - std::pow(1.0 - 1.0 / n, static_cast<double>(n));
    double total = 0;
    for (Seed seed = 0; seed < 50; ++seed) {
      const auto idx = bootstrap_indices(n, derive_seed(2024, seed));
      std::vector<bool> hit(n, false);
      for (auto i : idx) hit[i] = true;
      total += static_cast<double>(std::count(hit.begin(), hit.end(), true)) / n;
    }
    const double mean = total / 50;
    CHECK(std::abs(mean - expected) <= 0.02);
    CHECK(std::abs(mean - 0.632) <= 0.02);
  }

  TEST_CASE("empty dataset is rejected") {
    CHECK_THROWS_AS(bootstrap_indices(0, 1), Error);
  }
}

TEST_SUITE("partition_by") {
  TEST_CASE("direct partition in schema level order") {
    const Dataset d = small({{1, 20, 0, 0}, {1, 20, 1, 0}, {1, 20, 0, 0}}, {0, 0, 0});
    const auto parts = partition_by(d, "sex");
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].level == "female");
    CHECK(parts[0].rows == std::vector<std::size_t>{0, 2});
    CHECK(parts[1].level == "male");
    CHECK(parts[1].rows == std::vector<std::size_t>{1});
  }

  TEST_CASE("single observed level covers all rows") {
    const Dataset d = small({{1, 20, 0, 1}, {1, 20, 1, 1}}, {0, 0});
    const auto parts = partition_by(d, "weekday_weekend");
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].level == "weekend");
    CHECK(parts[0].rows.size() == 2);
  }

  TEST_CASE("errors") {
    const Dataset d = small({{1, 20, 0, 1}}, {0});
    try {
      partition_by(d, "hour");
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotCategorical);
    }
    try {
      partition_by(d, "nope");
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownFeature);
    }
  }

  TEST_CASE("subsets are disjoint and cover every row") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 1 + uniform_index(rng, 200);
      std::vector<double> values;
      for (std::size_t i = 0; i < n; ++i) {
        values.insert(values.end(), {1, 20, static_cast<double>(uniform_index(rng, 2)),
                                     static_cast<double>(uniform_index(rng, 2))});
      }
      const Dataset d(test::screening_schema(), values, std::vector<int>(n, 0));
      std::multiset<std::size_t> seen;
      for (const auto& p : partition_by(d, "sex")) seen.insert(p.rows.begin(), p.rows.end());
      CHECK(seen.size() == n);
      std::size_t expect = 0;
      for (auto i : seen) CHECK(i == expect++);
    }
  }
}
