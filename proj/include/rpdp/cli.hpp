#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rpdp/dataset.hpp"
#include "rpdp/error.hpp"
#include "rpdp/profiles.hpp"
#include "rpdp/rashomon.hpp"

namespace rpdp::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kInternalError = 4 };

/// Maps a library error to the exit code the CLI reports for it.
int exit_code_for(ErrorCode code);

struct ProfilePair {
  std::string feature;
  std::optional<std::string> group;  ///< none: ungrouped profile
  bool operator==(const ProfilePair&) const = default;
};

struct Emit {
  bool csv = true;
  bool json = false;
  bool svg = false;
};

struct RunSpec {
  std::string data_path;
  std::string schema_path;
  TargetSpec target;
  /// Empty: every schema feature except "year".
  std::vector<std::string> predictors;
  /// Empty: hour and age, each ungrouped and by every categorical predictor.
  std::vector<ProfilePair> pairs;
  RashomonConfig rashomon;
  bool seed_given = false;
  std::size_t grid_points = kDefaultGridPoints;
  double coverage = kDefaultCoverage;
  std::string out_dir = "rp_out";
  Emit emit;
  unsigned workers = 1;
};

/// Reads a JSON run spec. Unknown keys throw Error(InvalidConfig) naming them.
RunSpec spec_from_json(std::string_view text, RunSpec base = {});
RunSpec load_spec(const std::string& path, RunSpec base = {});

/// Canonical JSON of every spec field (sorted keys, compact).
std::string canonical_json(const RunSpec& spec);

/// Fills defaults that depend on the schema and checks every reference.
/// Throws Error(UnknownFeature/UnknownTarget/NotCategorical/
/// GroupEqualsFeature/InvalidConfig).
void resolve(RunSpec& spec, const Schema& schema);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

/// One row of the band CSV.
struct BandRow {
  std::string target;
  std::string feature;
  std::string group_variable;  ///< empty when ungrouped
  std::string group_level;     ///< empty when ungrouped
  std::string grid_value;
  double mean = 0;
  double lower = 0;
  double upper = 0;
  double coverage = 0;
  std::size_t members = 0;
};

struct PairBands {
  ProfilePair pair;
  std::vector<ProfileBand> bands;  ///< one per group level, or one if ungrouped
};

struct RunResult {
  RashomonSet set;       ///< all B members, models released
  std::size_t kept = 0;  ///< members surviving the epsilon filter
  std::vector<PairBands> bands;
};

/// Algorithm end to end: build the bootstrap set, profile every pair inside
/// each iteration, optionally epsilon-filter, aggregate. `spec` must be
/// resolved. Output is identical for any worker count.
RunResult run_pipeline(const Dataset& data, const RunSpec& spec);

std::vector<BandRow> band_rows(const RunSpec& spec, const RunResult& result);
void write_band_csv(const std::vector<BandRow>& rows, std::ostream& out);
/// Throws Error(MissingColumn/InvalidNumeric/...) on malformed input.
std::vector<BandRow> read_band_csv(std::istream& in);
std::string bands_json(const std::vector<BandRow>& rows);

struct LevelSummary {
  std::string level;  ///< empty when ungrouped
  std::string argmax;  ///< grid value where the mean peaks (first on ties)
  double peak = 0;
  double mean_width = 0;
};

struct ProfileSummary {
  std::string target;
  std::string feature;
  std::string group_variable;
  std::vector<LevelSummary> levels;
  /// dominance[a][b]: share of grid points where level a's mean is strictly
  /// above level b's.
  std::vector<std::vector<double>> dominance;
};

/// Groups rows by (target, feature, group variable) in first-seen order.
/// Throws Error(SchemaMismatch) when levels of one profile disagree on grid.
std::vector<ProfileSummary> summarize(const std::vector<BandRow>& rows);
void print_report(const std::vector<ProfileSummary>& summaries, std::ostream& out);

/// SVG plot of one (feature, group) profile: a mean line and a filled band
/// per level. `y_label` names the probability on the vertical axis.
std::string render_svg(const PairBands& bands, const std::string& y_label);

/// Entry point behind the `rp` binary. Diagnostics go to stderr, the report
/// to `out`.
int main(int argc, char** argv, std::ostream& out);

}  // namespace rpdp::cli
