#include "rpdp/synth.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "json.hpp"
#include "rpdp/error.hpp"

namespace rpdp::synth {

namespace {

using nlohmann::json;

constexpr double kAgeMin = 18;
constexpr double kAgeMax = 100;

std::vector<Stratum> strata_from_counts(std::initializer_list<std::array<int, 3>> rows) {
  double total = 0;
  for (const auto& r : rows) total += r[2];
  std::vector<Stratum> out;
  for (const auto& r : rows) out.push_back({r[0], r[1], r[2] / total});
  return out;
}

template <std::size_t N>
std::array<double, N> probs_from_counts(const std::array<double, N>& counts) {
  double total = 0;
  for (double c : counts) total += c;
  std::array<double, N> out{};
  for (std::size_t k = 0; k < N; ++k) out[k] = counts[k] / total;
  return out;
}

[[noreturn]] void marginal_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::InvalidMarginals, "marginals." + field + ": " + what);
}

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, field + ": " + what);
}

void check_probabilities(const std::string& field, std::span<const double> probs) {
  double sum = 0;
  for (double p : probs) {
    if (!(p >= 0) || !std::isfinite(p)) marginal_error(field, "probabilities must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) marginal_error(field, "probabilities must sum to 1");
}

void check_strata(const std::string& field, const std::vector<Stratum>& strata, double lo,
                  double hi) {
  if (strata.empty()) marginal_error(field, "needs at least one stratum");
  std::vector<double> probs;
  for (const auto& s : strata) {
    if (s.lo > s.hi) marginal_error(field, "stratum has lo > hi");
    if (s.lo < lo || s.hi > hi) marginal_error(field, "stratum outside the allowed range");
    probs.push_back(s.probability);
  }
  check_probabilities(field, probs);
}

template <class Rng>
std::size_t draw_category(Rng& rng, std::span<const double> probs) {
  const double u = uniform01(rng);
  double acc = 0;
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return probs.size() - 1;
}

template <class Rng>
double draw_stratified(Rng& rng, const std::vector<Stratum>& strata) {
  std::vector<double> probs;
  for (const auto& s : strata) probs.push_back(s.probability);
  const auto& s = strata[draw_category(rng, probs)];
  const auto width = static_cast<std::uint64_t>(s.hi - s.lo + 1);
  return s.lo + static_cast<double>(uniform_index(rng, width));
}

// (weight, value) pairs of a stratified integer marginal.
std::vector<std::pair<double, double>> support_of(const std::vector<Stratum>& strata) {
  std::vector<std::pair<double, double>> out;
  for (const auto& s : strata) {
    const double w = s.probability / (s.hi - s.lo + 1);
    for (int v = s.lo; v <= s.hi; ++v) out.emplace_back(w, v);
  }
  return out;
}

// Weighted log-odds of every feature combination, excluding base_logit.
std::vector<std::pair<double, double>> enumerate_logits(const SynthConfig& config,
                                                        const TargetEffects& effects) {
  TargetEffects e = effects;
  e.base_logit = 0;
  const auto& m = config.marginals;
  std::vector<std::pair<double, double>> out;
  double row[kColumns] = {0, 0, 0, 0, 0, 0};
  for (auto [wa, age] : support_of(m.age)) {
    for (auto [wh, hour] : support_of(m.hour)) {
      for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t ed = 0; ed < 3; ++ed) {
          for (std::size_t wk = 0; wk < 2; ++wk) {
            const double w = wa * wh * m.sex[s] * m.education[ed] * m.weekday[wk];
            if (w == 0) continue;
            row[kAge] = age;
            row[kHour] = hour;
            row[kSex] = static_cast<double>(s);
            row[kEducation] = static_cast<double>(ed);
            row[kWeekday] = static_cast<double>(wk);
            out.emplace_back(w, log_odds(row, e));
          }
        }
      }
    }
  }
  return out;
}

json strata_json(const std::vector<Stratum>& strata) {
  json out = json::array();
  for (const auto& s : strata) out.push_back({{"lo", s.lo}, {"hi", s.hi}, {"probability", s.probability}});
  return out;
}

json effects_json(const TargetEffects& e) {
  return {{"base_logit", e.base_logit},
          {"prevalence", e.prevalence},
          {"peak_hour", e.peak_hour},
          {"hour_amplitude", e.hour_amplitude},
          {"hour_half_width", e.hour_half_width},
          {"weekend_shift", e.weekend_shift},
          {"age_knee", e.age_knee},
          {"age_slope", e.age_slope},
          {"education_offsets", e.education_offsets},
          {"female_offset", e.female_offset},
          {"noise_sd", e.noise_sd}};
}

template <class T>
T field(const json& obj, const std::string& key, const std::string& path) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(path + key, "missing or has the wrong type");
  }
}

std::vector<Stratum> parse_strata(const json& value, const std::string& path) {
  if (!value.is_array()) config_error(path, "must be an array of strata");
  std::vector<Stratum> out;
  for (const auto& item : value) {
    if (!item.is_object()) config_error(path, "stratum must be an object");
    for (const auto& [k, v] : item.items()) {
      if (k != "lo" && k != "hi" && k != "probability") config_error(path + "." + k, "unknown field");
    }
    out.push_back({field<int>(item, "lo", path + "."), field<int>(item, "hi", path + "."),
                   field<double>(item, "probability", path + ".")});
  }
  return out;
}

template <std::size_t N>
std::array<double, N> parse_probs(const json& value, const std::string& path) {
  if (!value.is_array() || value.size() != N) {
    config_error(path, "must be an array of " + std::to_string(N) + " probabilities");
  }
  std::array<double, N> out{};
  for (std::size_t k = 0; k < N; ++k) {
    if (!value[k].is_number()) config_error(path, "entries must be numbers");
    out[k] = value[k].get<double>();
  }
  return out;
}

void apply_effects(TargetEffects& e, const json& obj, const std::string& path) {
  if (!obj.is_object()) config_error(path, "must be an object");
  bool base_given = false;
  bool prevalence_given = false;
  for (const auto& [key, value] : obj.items()) {
    const std::string at = path + "." + key;
    auto number = [&]() {
      if (!value.is_number()) config_error(at, "must be a number");
      return value.get<double>();
    };
    if (key == "base_logit") {
      e.base_logit = number();
      base_given = true;
    } else if (key == "prevalence") {
      e.prevalence = number();
      prevalence_given = true;
    } else if (key == "peak_hour") {
      e.peak_hour = number();
    } else if (key == "hour_amplitude") {
      e.hour_amplitude = number();
    } else if (key == "hour_half_width") {
      e.hour_half_width = number();
    } else if (key == "weekend_shift") {
      e.weekend_shift = number();
    } else if (key == "age_knee") {
      e.age_knee = number();
    } else if (key == "age_slope") {
      e.age_slope = number();
    } else if (key == "education_offsets") {
      e.education_offsets = parse_probs<3>(value, at);
    } else if (key == "female_offset") {
      e.female_offset = number();
    } else if (key == "noise_sd") {
      e.noise_sd = number();
    } else {
      config_error(at, "unknown field");
    }
  }
  if (base_given && !prevalence_given) e.prevalence = 0;
}

}  // namespace

SynthConfig default_config() {
  SynthConfig c;
  auto& m = c.marginals;
  m.year = strata_from_counts({{2020, 2020, 8024},
                               {2021, 2021, 1540},
                               {2022, 2022, 2208},
                               {2023, 2023, 2246},
                               {2024, 2024, 20425}});
  m.age = strata_from_counts(
      {{18, 30, 4685}, {31, 40, 6557}, {41, 50, 10548}, {51, 60, 10583}, {61, 80, 2070}});
  m.hour = strata_from_counts(
      {{0, 5, 5072}, {6, 11, 4918}, {12, 16, 8775}, {17, 20, 8381}, {21, 23, 7297}});
  m.sex = probs_from_counts<2>({28781, 5662});
  m.education = probs_from_counts<3>({8154, 8736, 17553});
  m.weekday = probs_from_counts<2>({26186, 8257});

  TargetEffects gad;
  gad.name = "gad2";
  gad.prevalence = (5423.0 + 4077.0 + 9716.0) / 34443.0;
  gad.peak_hour = 2;
  gad.hour_amplitude = 1.2;
  gad.weekend_shift = 0.35;
  gad.age_knee = 50;
  gad.age_slope = 0.06;
  gad.education_offsets = {0.5, 0.25, 0.0};
  gad.female_offset = 0.35;

  TargetEffects phq;
  phq.name = "phq2";
  phq.prevalence = (4617.0 + 3332.0 + 8341.0) / 34443.0;
  phq.peak_hour = 2;
  phq.hour_amplitude = 1.0;
  phq.weekend_shift = 0.3;
  phq.age_knee = 35;
  phq.age_slope = 0.04;
  phq.education_offsets = {0.5, 0.35, 0.0};
  phq.female_offset = 0.3;

  c.targets = {gad, phq};
  calibrate(c);
  return c;
}

void validate(const SynthConfig& c) {
  const auto& m = c.marginals;
  check_strata("year", m.year, -1e9, 1e9);
  check_strata("age", m.age, kAgeMin, kAgeMax);
  check_strata("hour", m.hour, 0, 23);
  check_probabilities("sex", m.sex);
  check_probabilities("education", m.education);
  check_probabilities("weekday", m.weekday);
  if (c.score_max < 1) config_error("score_max", "must be >= 1");
  if (c.exceedance_threshold < 0 || c.exceedance_threshold >= c.score_max) {
    config_error("exceedance_threshold", "must lie in 0..score_max-1");
  }
  std::set<std::string> names;
  for (const auto& e : c.targets) {
    const std::string at = "targets." + e.name;
    if (e.name.empty()) config_error("targets", "target names must be nonempty");
    if (!names.insert(e.name).second) config_error(at, "duplicate target");
    for (double v : {e.base_logit, e.hour_amplitude, e.weekend_shift, e.age_knee, e.age_slope,
                     e.female_offset, e.education_offsets[0], e.education_offsets[1],
                     e.education_offsets[2]}) {
      if (!std::isfinite(v)) config_error(at, "effects must be finite");
    }
    if (!(e.peak_hour >= 0 && e.peak_hour <= 23)) config_error(at + ".peak_hour", "must lie in 0..23");
    if (!(e.hour_half_width > 0)) config_error(at + ".hour_half_width", "must be > 0");
    if (!(e.noise_sd >= 0)) config_error(at + ".noise_sd", "must be >= 0");
    if (!(e.prevalence >= 0 && e.prevalence < 1)) config_error(at + ".prevalence", "must lie in [0, 1)");
  }
}

void calibrate(SynthConfig& config) {
  validate(config);
  for (auto& e : config.targets) {
    if (e.prevalence <= 0) continue;
    const auto logits = enumerate_logits(config, e);
    auto mean_at = [&](double base) {
      double sum = 0;
      for (auto [w, eta] : logits) sum += w * logistic(base + eta);
      return sum;
    };
    double lo = -40;
    double hi = 40;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mean_at(mid) < e.prevalence ? lo : hi) = mid;
    }
    e.base_logit = 0.5 * (lo + hi);
  }
}

SynthConfig config_from_json(std::string_view text, SynthConfig base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error("config", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) config_error("config", "must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "n") {
      if (!value.is_number_unsigned()) config_error("n", "must be a nonnegative integer");
      base.n = value.get<std::size_t>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) config_error("seed", "must be a nonnegative integer");
      base.seed = value.get<Seed>();
    } else if (key == "score_max") {
      if (!value.is_number_integer()) config_error("score_max", "must be an integer");
      base.score_max = value.get<int>();
    } else if (key == "exceedance_threshold") {
      if (!value.is_number_integer()) config_error("exceedance_threshold", "must be an integer");
      base.exceedance_threshold = value.get<int>();
    } else if (key == "marginals") {
      if (!value.is_object()) config_error("marginals", "must be an object");
      auto& m = base.marginals;
      for (const auto& [mk, mv] : value.items()) {
        const std::string at = "marginals." + mk;
        if (mk == "year") m.year = parse_strata(mv, at);
        else if (mk == "age") m.age = parse_strata(mv, at);
        else if (mk == "hour") m.hour = parse_strata(mv, at);
        else if (mk == "sex") m.sex = parse_probs<2>(mv, at);
        else if (mk == "education") m.education = parse_probs<3>(mv, at);
        else if (mk == "weekday") m.weekday = parse_probs<2>(mv, at);
        else config_error(at, "unknown field");
      }
    } else if (key == "targets") {
      if (!value.is_object()) config_error("targets", "must be an object keyed by target name");
      for (const auto& [name, effects] : value.items()) {
        auto it = std::find_if(base.targets.begin(), base.targets.end(),
                               [&](const TargetEffects& e) { return e.name == name; });
        if (it == base.targets.end()) {
          TargetEffects fresh;
          fresh.name = name;
          base.targets.push_back(fresh);
          it = base.targets.end() - 1;
        }
        apply_effects(*it, effects, "targets." + name);
      }
    } else {
      config_error(key, "unknown field");
    }
  }
  calibrate(base);
  return base;
}

std::shared_ptr<const Schema> make_schema(const SynthConfig& config) {
  std::vector<FeatureSpec> features(kColumns);
  features[kYear] = {"year", FeatureKind::Numeric, {}, std::nullopt, std::nullopt};
  features[kAge] = {"age", FeatureKind::Numeric, {}, kAgeMin, kAgeMax};
  features[kSex] = {"sex", FeatureKind::Categorical, {kSexLevels.begin(), kSexLevels.end()},
                    std::nullopt, std::nullopt};
  features[kEducation] = {"education", FeatureKind::Categorical,
                          {kEducationLevels.begin(), kEducationLevels.end()}, std::nullopt,
                          std::nullopt};
  features[kHour] = {"hour", FeatureKind::Numeric, {}, 0.0, 23.0};
  features[kWeekday] = {"weekday_weekend", FeatureKind::Categorical,
                        {kWeekdayLevels.begin(), kWeekdayLevels.end()}, std::nullopt,
                        std::nullopt};
  std::vector<TargetRange> targets;
  for (const auto& e : config.targets) targets.push_back({e.name, 0, config.score_max});
  return std::make_shared<const Schema>(std::move(features), std::move(targets));
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double hour_bump(double hour, double peak, double half_width) {
  double d = std::abs(hour - peak);
  d = std::min(d, 24.0 - d);
  return std::max(0.0, 1.0 - d / half_width);
}

double log_odds(std::span<const double> row, const TargetEffects& e) {
  if (row.size() != kColumns) {
    throw Error(ErrorCode::SchemaMismatch, "true_risk expects " + std::to_string(kColumns) +
                                               " columns, got " + std::to_string(row.size()));
  }
  const auto edu = static_cast<std::size_t>(row[kEducation]);
  if (edu >= 3 || row[kSex] < 0 || row[kSex] > 1 || row[kWeekday] < 0 || row[kWeekday] > 1) {
    throw Error(ErrorCode::SchemaMismatch, "row holds an invalid level code");
  }
  double eta = e.base_logit;
  eta += e.hour_amplitude * hour_bump(row[kHour], e.peak_hour, e.hour_half_width);
  eta += e.weekend_shift * (row[kWeekday] == 1 ? 1.0 : 0.0);
  eta -= e.age_slope * std::max(0.0, row[kAge] - e.age_knee);
  eta += e.education_offsets[edu];
  eta += e.female_offset * (row[kSex] == 0 ? 1.0 : 0.0);
  return eta;
}

double true_risk(std::span<const double> row, const TargetEffects& e) {
  return logistic(log_odds(row, e));
}

double expected_risk(const SynthConfig& config, const TargetEffects& effects) {
  double sum = 0;
  for (auto [w, eta] : enumerate_logits(config, effects)) sum += w * logistic(effects.base_logit + eta);
  return sum;
}

double binomial_exceedance(double q, int trials, int threshold) {
  // Sum of C(trials, k) q^k (1-q)^(trials-k) over k > threshold.
  double total = 0;
  double choose = 1;
  for (int k = 0; k <= trials; ++k) {
    if (k > threshold) total += choose * std::pow(q, k) * std::pow(1 - q, trials - k);
    choose = choose * (trials - k) / (k + 1);
  }
  return total;
}

double solve_success_probability(double p, int trials, int threshold) {
  double lo = 0;
  double hi = 1;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (binomial_exceedance(mid, trials, threshold) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Dataset generate(const SynthConfig& config) {
  validate(config);
  auto schema = make_schema(config);
  const auto& m = config.marginals;
  const std::size_t nt = config.targets.size();
  std::vector<double> values(config.n * kColumns);
  std::vector<int> scores(config.n * nt);
  for (std::size_t i = 0; i < config.n; ++i) {
    SplitMix64 rng(derive_seed(config.seed, Stream::Row, i));
    double* row = values.data() + i * kColumns;
    row[kYear] = draw_stratified(rng, m.year);
    row[kAge] = draw_stratified(rng, m.age);
    row[kSex] = static_cast<double>(draw_category(rng, m.sex));
    row[kEducation] = static_cast<double>(draw_category(rng, m.education));
    row[kHour] = draw_stratified(rng, m.hour);
    row[kWeekday] = static_cast<double>(draw_category(rng, m.weekday));
    for (std::size_t t = 0; t < nt; ++t) {
      const auto& e = config.targets[t];
      double eta = log_odds({row, kColumns}, e);
      if (e.noise_sd > 0) {
        const double u1 = 1.0 - uniform01(rng);
        const double u2 = uniform01(rng);
        eta += e.noise_sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
      }
      const double p = logistic(eta);
      const double q = solve_success_probability(p, config.score_max, config.exceedance_threshold);
      int score = 0;
      for (int k = 0; k < config.score_max; ++k) score += uniform01(rng) < q ? 1 : 0;
      scores[i * nt + t] = score;
    }
  }
  return Dataset(std::move(schema), std::move(values), std::move(scores));
}

std::string truth_json(const SynthConfig& c) {
  json doc;
  doc["n"] = c.n;
  doc["seed"] = c.seed;
  doc["score_max"] = c.score_max;
  doc["exceedance_threshold"] = c.exceedance_threshold;
  doc["marginals"] = {{"year", strata_json(c.marginals.year)},
                      {"age", strata_json(c.marginals.age)},
                      {"hour", strata_json(c.marginals.hour)},
                      {"sex", c.marginals.sex},
                      {"education", c.marginals.education},
                      {"weekday", c.marginals.weekday}};
  doc["targets"] = json::object();
  for (const auto& e : c.targets) {
    auto entry = effects_json(e);
    entry["expected_exceedance"] = expected_risk(c, e);
    doc["targets"][e.name] = std::move(entry);
  }
  doc["levels"] = {{"sex", kSexLevels},
                   {"education", kEducationLevels},
                   {"weekday_weekend", kWeekdayLevels}};
  return doc.dump(2);
}

}  // namespace rpdp::synth
