#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rpdp/dataset.hpp"
#include "rpdp/random.hpp"

namespace rpdp::synth {

/// Column order of generated rows.
enum Column : std::size_t { kYear, kAge, kSex, kEducation, kHour, kWeekday, kColumns };

inline constexpr std::array<std::string_view, 2> kSexLevels{"female", "male"};
inline constexpr std::array<std::string_view, 3> kEducationLevels{"below_high_school",
                                                                   "high_school", "graduate"};
inline constexpr std::array<std::string_view, 2> kWeekdayLevels{"weekday", "weekend"};

/// Integer values lo..hi drawn uniformly once the stratum is picked.
struct Stratum {
  int lo = 0;
  int hi = 0;
  double probability = 0;
};

struct Marginals {
  std::vector<Stratum> year;
  std::vector<Stratum> age;
  std::vector<Stratum> hour;
  std::array<double, 2> sex{};        ///< female, male
  std::array<double, 3> education{};  ///< lowest to highest
  std::array<double, 2> weekday{};    ///< weekday, weekend
};

/// Planted log-odds structure for one score column:
///   base + hour_amplitude * bump(hour) + weekend_shift * [weekend]
///        - age_slope * max(0, age - age_knee) + education_offsets[edu]
///        + female_offset * [female]
/// where bump is a circular triangle of half-width hour_half_width peaking
/// at peak_hour (so hour 23 neighbours hour 0).
struct TargetEffects {
  std::string name;
  double base_logit = 0;
  /// When > 0, base_logit is re-solved so that the mean exceedance under the
  /// marginals equals this value.
  double prevalence = 0;
  double peak_hour = 2;
  double hour_amplitude = 0;
  double hour_half_width = 3;
  double weekend_shift = 0;
  double age_knee = 50;
  double age_slope = 0;
  std::array<double, 3> education_offsets{};
  double female_offset = 0;
  /// Standard deviation of per-row Gaussian noise on the log-odds. 0 keeps
  /// the exceedance probability equal to true_risk.
  double noise_sd = 0;
};

struct SynthConfig {
  std::size_t n = 34443;
  Seed seed = 0;
  Marginals marginals;
  std::vector<TargetEffects> targets;
  int score_max = 6;
  int exceedance_threshold = 3;
};

/// Marginals from the survey's descriptive counts and two calibrated
/// targets (gad2, phq2). Effects already have base_logit solved.
SynthConfig default_config();

/// Applies overrides from a JSON object on top of `base`, then validates and
/// recalibrates. Unknown or ill-typed fields throw Error(InvalidConfig)
/// naming the field.
SynthConfig config_from_json(std::string_view text, SynthConfig base = default_config());

/// Throws Error(InvalidMarginals) or Error(InvalidConfig).
void validate(const SynthConfig& config);

/// Re-solves base_logit for every target with prevalence > 0.
void calibrate(SynthConfig& config);

std::shared_ptr<const Schema> make_schema(const SynthConfig& config);

double logistic(double x);
double hour_bump(double hour, double peak, double half_width);

/// Planted log-odds of a row in generator column order.
double log_odds(std::span<const double> row, const TargetEffects& effects);

/// Noise-free probability that the score exceeds the threshold for a row in
/// generator column order. Throws Error(SchemaMismatch) on width mismatch.
double true_risk(std::span<const double> row, const TargetEffects& effects);

/// Mean of true_risk over the product of the marginals (exact enumeration).
double expected_risk(const SynthConfig& config, const TargetEffects& effects);

/// q in [0,1] with P(Binomial(trials, q) > threshold) = p, by bisection to 1e-10.
double solve_success_probability(double p, int trials, int threshold);
double binomial_exceedance(double q, int trials, int threshold);

/// Draws n rows. Row i uses its own stream derive_seed(seed, Stream::Row, i).
Dataset generate(const SynthConfig& config);

/// Full config plus planted ground truth, for the sidecar file.
std::string truth_json(const SynthConfig& config);

}  // namespace rpdp::synth
