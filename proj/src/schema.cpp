#include "rpdp/schema.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rpdp/error.hpp"

namespace rpdp {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& message) {
  throw Error(ErrorCode::InvalidSchema, "schema: " + message);
}

}  // namespace

Schema::Schema(std::vector<FeatureSpec> features, std::vector<TargetRange> targets)
    : features_(std::move(features)), targets_(std::move(targets)) {
  std::set<std::string, std::less<>> names;
  auto claim = [&](const std::string& name) {
    if (name.empty()) schema_error("column names must be nonempty");
    if (!names.insert(name).second) schema_error("duplicate column name '" + name + "'");
  };
  for (const auto& f : features_) {
    claim(f.name);
    if (f.is_categorical()) {
      if (f.levels.empty()) schema_error("categorical feature '" + f.name + "' has no levels");
      std::set<std::string> seen;
      for (const auto& level : f.levels) {
        if (level.empty()) schema_error("feature '" + f.name + "' has an empty level name");
        if (!seen.insert(level).second) {
          schema_error("feature '" + f.name + "' repeats level '" + level + "'");
        }
      }
      if (f.min || f.max) schema_error("categorical feature '" + f.name + "' cannot have bounds");
    } else {
      if (!f.levels.empty()) schema_error("numeric feature '" + f.name + "' cannot have levels");
      if ((f.min && !std::isfinite(*f.min)) || (f.max && !std::isfinite(*f.max))) {
        schema_error("numeric feature '" + f.name + "' has non-finite bounds");
      }
      if (f.min && f.max && *f.min > *f.max) {
        schema_error("numeric feature '" + f.name + "' has min > max");
      }
    }
  }
  for (const auto& t : targets_) {
    claim(t.name);
    if (t.lo > t.hi) schema_error("target '" + t.name + "' has lo > hi");
  }
}

Schema Schema::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("document must be an object");

  std::vector<FeatureSpec> features;
  std::vector<TargetRange> targets;
  try {
    for (const auto& item : doc.at("features")) {
      FeatureSpec f;
      f.name = item.at("name").get<std::string>();
      const auto kind = item.at("kind").get<std::string>();
      if (kind == "numeric") {
        f.kind = FeatureKind::Numeric;
      } else if (kind == "categorical") {
        f.kind = FeatureKind::Categorical;
        f.levels = item.at("levels").get<std::vector<std::string>>();
      } else {
        schema_error("feature '" + f.name + "' has unknown kind '" + kind + "'");
      }
      if (item.contains("min")) f.min = item.at("min").get<double>();
      if (item.contains("max")) f.max = item.at("max").get<double>();
      features.push_back(std::move(f));
    }
    if (doc.contains("targets")) {
      for (const auto& item : doc.at("targets")) {
        targets.push_back({item.at("name").get<std::string>(), item.at("lo").get<int>(),
                           item.at("hi").get<int>()});
      }
    }
  } catch (const json::exception& e) {
    schema_error(e.what());
  }
  return Schema(std::move(features), std::move(targets));
}

Schema Schema::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open schema file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string Schema::to_json() const {
  json doc;
  doc["features"] = json::array();
  for (const auto& f : features_) {
    json item;
    item["name"] = f.name;
    item["kind"] = f.is_categorical() ? "categorical" : "numeric";
    if (f.is_categorical()) item["levels"] = f.levels;
    if (f.min) item["min"] = *f.min;
    if (f.max) item["max"] = *f.max;
    doc["features"].push_back(std::move(item));
  }
  doc["targets"] = json::array();
  for (const auto& t : targets_) {
    doc["targets"].push_back({{"name", t.name}, {"lo", t.lo}, {"hi", t.hi}});
  }
  return doc.dump(2);
}

std::optional<std::size_t> Schema::find_feature(std::string_view name) const {
  for (std::size_t j = 0; j < features_.size(); ++j) {
    if (features_[j].name == name) return j;
  }
  return std::nullopt;
}

std::optional<std::size_t> Schema::find_target(std::string_view name) const {
  for (std::size_t t = 0; t < targets_.size(); ++t) {
    if (targets_[t].name == name) return t;
  }
  return std::nullopt;
}

std::size_t Schema::feature_index(std::string_view name) const {
  if (auto j = find_feature(name)) return *j;
  throw Error(ErrorCode::UnknownFeature, "unknown feature '" + std::string(name) + "'");
}

std::size_t Schema::target_index(std::string_view name) const {
  if (auto t = find_target(name)) return *t;
  throw Error(ErrorCode::UnknownTarget, "unknown target '" + std::string(name) + "'");
}

std::optional<std::size_t> Schema::find_level(std::size_t feature, std::string_view level) const {
  const auto& levels = features_.at(feature).levels;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k] == level) return k;
  }
  return std::nullopt;
}

std::string Schema::format_value(std::size_t feature, double value) const {
  const auto& f = features_.at(feature);
  if (f.is_categorical()) return f.levels.at(static_cast<std::size_t>(value));
  return format_double(value);
}

std::string format_double(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, end);
}

}  // namespace rpdp
