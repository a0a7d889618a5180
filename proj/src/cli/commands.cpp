#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rpdp/cli.hpp"
#include "rpdp/error.hpp"
#include "rpdp/synth.hpp"

namespace rpdp::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::shared_ptr<spdlog::logger> logger() {
  static const auto instance = [] {
    auto log = spdlog::stderr_logger_mt("rp");
    log->set_pattern("rp: [%l] %v");
    const char* level = std::getenv("RP_LOG");
    log->set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
    return log;
  }();
  return instance;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << bytes;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json spread_json(const Spread& s) {
  return {{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"stdev", s.stdev}};
}

std::string svg_name(const std::string& target, const ProfilePair& pair) {
  std::string name = target + "_" + pair.feature;
  if (pair.group) name += "_by_" + *pair.group;
  return name + ".svg";
}

// Options of `rp synth`.
struct SynthArgs {
  std::string config;
  std::string out;
  std::optional<Seed> seed;
};

int cmd_synth(const SynthArgs& args) {
  synth::SynthConfig config = synth::default_config();
  bool seeded = false;
  if (!args.config.empty()) {
    const std::string text = read_bytes(args.config);
    config = synth::config_from_json(text);
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    seeded = doc.is_object() && doc.contains("seed");
  }
  if (args.seed) {
    config.seed = *args.seed;
    seeded = true;
  }
  if (!seeded) throw Error(ErrorCode::InvalidConfig, "--seed is required (or 'seed' in the config)");

  const Dataset data = synth::generate(config);
  const fs::path out(args.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  fs::path stem = out;
  stem.replace_extension();
  write_csv(data, out.string());
  write_bytes(stem.string() + ".truth.json", synth::truth_json(config));
  write_bytes(stem.string() + ".schema.json", data.schema().to_json());
  logger()->info("wrote {} rows to {}", data.rows(), out.string());
  return kOk;
}

int cmd_run(RunSpec spec, std::ostream& out) {
  if (!spec.seed_given) throw Error(ErrorCode::InvalidConfig, "--seed is required (or 'seed' in the run spec file)");
  if (spec.data_path.empty()) throw Error(ErrorCode::InvalidConfig, "--data is required");
  if (spec.schema_path.empty()) throw Error(ErrorCode::InvalidConfig, "--schema is required");

  const std::string schema_bytes = read_bytes(spec.schema_path);
  auto schema = std::make_shared<const Schema>(Schema::from_json(schema_bytes));
  resolve(spec, *schema);
  const std::string data_bytes = read_bytes(spec.data_path);
  std::istringstream data_stream(data_bytes);
  const Dataset data = read_csv(data_stream, schema);
  logger()->info("{} rows, target {}, B = {}, {} profile pairs, {} workers", data.rows(),
                 spec.target.column, spec.rashomon.iterations, spec.pairs.size(), spec.workers);

  const auto start = std::chrono::steady_clock::now();
  const RunResult result = run_pipeline(data, spec);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const PerformanceSpread spread = performance_spread(result.set);
  logger()->info("built {} members in {:.1f} s; brier {:.4f}..{:.4f}; {} kept", result.set.members.size(),
                 seconds, spread.brier.min, spread.brier.max, result.kept);

  const fs::path dir(spec.out_dir);
  fs::create_directories(dir);
  const auto rows = band_rows(spec, result);
  json outputs = json::array();
  if (spec.emit.csv) {
    std::ostringstream bands, members;
    write_band_csv(rows, bands);
    write_members_csv(result.set, members);
    write_bytes(dir / "bands.csv", bands.str());
    write_bytes(dir / "members.csv", members.str());
    outputs.push_back("bands.csv");
    outputs.push_back("members.csv");
  }
  if (spec.emit.json) {
    write_bytes(dir / "bands.json", bands_json(rows));
    outputs.push_back("bands.json");
  }
  if (spec.emit.svg) {
    const char* op = spec.target.mode == ThresholdMode::Strict ? " > " : " >= ";
    const std::string y_label = "P(" + spec.target.column + op + std::to_string(spec.target.threshold) + ")";
    for (const auto& pb : result.bands) {
      const std::string name = svg_name(spec.target.column, pb.pair);
      write_bytes(dir / name, render_svg(pb, y_label));
      outputs.push_back(name);
    }
  }

  std::uint64_t hash = fnv1a(data_bytes);
  hash = fnv1a(std::string_view("\0", 1), hash);
  hash = fnv1a(schema_bytes, hash);
  hash = fnv1a(std::string_view("\0", 1), hash);
  hash = fnv1a(canonical_json(spec), hash);

  json manifest;
  manifest["master_seed"] = spec.rashomon.master_seed;
  manifest["config_hash"] = hex64(hash);
  manifest["wall_time_seconds"] = seconds;
  manifest["rows"] = data.rows();
  manifest["iterations"] = result.set.members.size();
  manifest["members_kept"] = result.kept;
  manifest["performance_spread"] = {{"accuracy", spread_json(spread.accuracy)},
                                    {"brier", spread_json(spread.brier)},
                                    {"positive_rate", spread_json(spread.positive_rate)}};
  manifest["spec"] = json::parse(canonical_json(spec));
  manifest["outputs"] = outputs;
  write_bytes(dir / "manifest.json", manifest.dump(2) + "\n");

  print_report(summarize(rows), out);
  return kOk;
}

int cmd_report(const std::vector<std::string>& paths, std::ostream& out) {
  std::vector<BandRow> rows;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    try {
      auto more = read_band_csv(in);
      rows.insert(rows.end(), more.begin(), more.end());
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidNumeric, path + ": " + e.what());
    }
  }
  print_report(summarize(rows), out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv, std::ostream& out) {
  CLI::App app{"Rashomon partial dependence profiles: bootstrap random forests, grouped PDPs, quantile bands"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic screening dataset with planted effects");
  synth->add_option("--config", synth_args.config, "JSON overrides of the default generator config")
      ->check(CLI::ExistingFile);
  synth->add_option("--out", synth_args.out, "output CSV; sidecars <stem>.truth.json and <stem>.schema.json")
      ->required();
  synth->add_option("--seed", synth_args.seed, "generator seed");

  // run: flags override fields of the optional spec file.
  auto* run = app.add_subcommand("run", "build the bootstrap set, profile, aggregate and write bands");
  run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string spec_path, data, schema, target, mode, out_dir;
  std::optional<int> threshold;
  std::vector<std::string> features, groups, predictors, emit;
  std::optional<std::size_t> iterations, trees, mtry, min_leaf, max_depth, grid_points;
  std::optional<Seed> seed;
  std::optional<double> epsilon, coverage;
  std::optional<unsigned> workers;
  run->add_option("--spec", spec_path, "JSON run spec")->check(CLI::ExistingFile);
  run->add_option("--data", data, "data CSV");
  run->add_option("--schema", schema, "schema JSON");
  run->add_option("--target", target, "target score column (default: first in schema)");
  run->add_option("--threshold", threshold, "cut-off score (default 3)");
  run->add_option("--mode", mode, "strict (score > t) or inclusive (score >= t)")
      ->check(CLI::IsMember({"strict", "inclusive"}));
  run->add_option("--feature", features, "feature to profile (repeatable, paired with --group)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  run->add_option("--group", groups, "grouping variable for the matching --feature, '-' for none")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  run->add_option("--predictors", predictors, "model predictors (default: all but year)")->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  run->add_option("--iterations", iterations, "bootstrap iterations B (default 100)");
  run->add_option("--seed", seed, "master seed (required)");
  run->add_option("--epsilon", epsilon, "keep members within epsilon of the best Brier score");
  run->add_option("--coverage", coverage, "central band coverage (default 0.95)");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--emit", emit, "comma list of csv,json,svg")->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  run->add_option("--workers", workers, "parallel workers (results do not depend on it)");
  run->add_option("--trees", trees, "trees per forest (default 50)");
  run->add_option("--mtry", mtry, "features tried per split (default floor(sqrt(p)))");
  run->add_option("--min-leaf", min_leaf, "minimum leaf size (default 5)");
  run->add_option("--max-depth", max_depth, "depth cap (default none)");
  run->add_option("--grid-points", grid_points, "numeric grid cap (default 51)");

  std::vector<std::string> report_paths;
  auto* report = app.add_subcommand("report", "summarize band CSVs: peaks, band widths, group dominance");
  report->add_option("bands", report_paths, "band CSV files")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    logger()->error("{}", e.what());
    return kConfigError;
  }

  try {
    if (*synth) return cmd_synth(synth_args);
    if (*report) {
      try {
        return cmd_report(report_paths, out);
      } catch (const Error& e) {
        logger()->error("{}", e.what());
        return kDataError;
      }
    }

    RunSpec spec;
    if (!spec_path.empty()) spec = load_spec(spec_path);
    if (!data.empty()) spec.data_path = data;
    if (!schema.empty()) spec.schema_path = schema;
    if (!target.empty()) spec.target.column = target;
    if (threshold) spec.target.threshold = *threshold;
    if (!mode.empty()) spec.target.mode = mode == "strict" ? ThresholdMode::Strict : ThresholdMode::Inclusive;
    if (!predictors.empty()) spec.predictors = predictors;
    if (!features.empty()) {
      if (!groups.empty() && groups.size() != features.size()) {
        throw Error(ErrorCode::InvalidConfig, "--group must be given once per --feature (use '-' for none)");
      }
      spec.pairs.clear();
      for (std::size_t i = 0; i < features.size(); ++i) {
        ProfilePair p{features[i], std::nullopt};
        if (!groups.empty() && groups[i] != "-") p.group = groups[i];
        spec.pairs.push_back(std::move(p));
      }
    } else if (!groups.empty()) {
      throw Error(ErrorCode::InvalidConfig, "--group needs a matching --feature");
    }
    if (iterations) spec.rashomon.iterations = *iterations;
    if (seed) {
      spec.rashomon.master_seed = *seed;
      spec.seed_given = true;
    }
    if (epsilon) spec.rashomon.epsilon = *epsilon;
    if (coverage) spec.coverage = *coverage;
    if (!out_dir.empty()) spec.out_dir = out_dir;
    if (!emit.empty()) {
      spec.emit = {false, false, false};
      for (const auto& e : emit) {
        if (e == "csv") {
          spec.emit.csv = true;
        } else if (e == "json") {
          spec.emit.json = true;
        } else if (e == "svg") {
          spec.emit.svg = true;
        } else {
          throw Error(ErrorCode::InvalidConfig, "--emit: unknown format '" + e + "'");
        }
      }
    }
    if (workers) spec.workers = *workers;
    if (trees) spec.rashomon.forest.n_trees = *trees;
    if (mtry) spec.rashomon.forest.mtry = *mtry;
    if (min_leaf) spec.rashomon.forest.min_leaf = *min_leaf;
    if (max_depth) spec.rashomon.forest.max_depth = *max_depth;
    if (grid_points) spec.grid_points = *grid_points;
    return cmd_run(std::move(spec), out);
  } catch (const Error& e) {
    logger()->error("{} ({})", e.what(), to_string(e.code()));
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    logger()->error("internal error: {}", e.what());
    return kInternalError;
  }
}

}  // namespace rpdp::cli
