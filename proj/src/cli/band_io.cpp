#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "rpdp/cli.hpp"
#include "rpdp/error.hpp"

namespace rpdp::cli {

namespace {

constexpr const char* kHeader =
    "target,feature,group_variable,group_level,grid_value,mean,lower,upper,coverage,B";

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) {
    throw Error(ErrorCode::InvalidNumeric, "band file line " + std::to_string(line_no) + ": unterminated quote");
  }
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no, const char* column) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidNumeric, "band file line " + std::to_string(line_no) +
                                               ", column '" + column + "': not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<BandRow> band_rows(const RunSpec& spec, const RunResult& result) {
  std::vector<BandRow> rows;
  for (const auto& pb : result.bands) {
    for (const auto& band : pb.bands) {
      for (std::size_t k = 0; k < band.grid.size(); ++k) {
        rows.push_back({spec.target.column, band.feature, pb.pair.group.value_or(""),
                        band.group_level.value_or(""), band.grid.labels[k], band.mean[k],
                        band.lower[k], band.upper[k], band.coverage, band.members});
      }
    }
  }
  return rows;
}

void write_band_csv(const std::vector<BandRow>& rows, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& r : rows) {
    out << quote(r.target) << ',' << quote(r.feature) << ',' << quote(r.group_variable) << ','
        << quote(r.group_level) << ',' << quote(r.grid_value) << ',' << format_double(r.mean) << ','
        << format_double(r.lower) << ',' << format_double(r.upper) << ','
        << format_double(r.coverage) << ',' << r.members << '\n';
  }
}

std::vector<BandRow> read_band_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyDataset, "band file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw Error(ErrorCode::MissingColumn, std::string("band file header must be '") + kHeader + "'");
  }
  std::vector<BandRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, line_no);
    if (f.size() != 10) {
      throw Error(ErrorCode::SchemaMismatch, "band file line " + std::to_string(line_no) + ": expected 10 fields, got " +
                                                 std::to_string(f.size()));
    }
    BandRow r{f[0], f[1], f[2], f[3], f[4],
              parse_double(f[5], line_no, "mean"),
              parse_double(f[6], line_no, "lower"),
              parse_double(f[7], line_no, "upper"),
              parse_double(f[8], line_no, "coverage"),
              0};
    std::size_t members = 0;
    const auto [ptr, ec] = std::from_chars(f[9].data(), f[9].data() + f[9].size(), members);
    if (ec != std::errc() || ptr != f[9].data() + f[9].size() || f[9].empty()) {
      throw Error(ErrorCode::InvalidNumeric, "band file line " + std::to_string(line_no) + ", column 'B': not a count");
    }
    r.members = members;
    if (!(r.lower <= r.mean && r.mean <= r.upper)) {
      throw Error(ErrorCode::OutOfRange, "band file line " + std::to_string(line_no) + ": needs lower <= mean <= upper");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyDataset, "band file has no rows");
  return rows;
}

std::string bands_json(const std::vector<BandRow>& rows) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    doc.push_back({{"target", r.target},
                   {"feature", r.feature},
                   {"group_variable", r.group_variable},
                   {"group_level", r.group_level},
                   {"grid_value", r.grid_value},
                   {"mean", r.mean},
                   {"lower", r.lower},
                   {"upper", r.upper},
                   {"coverage", r.coverage},
                   {"B", r.members}});
  }
  return doc.dump(1) + "\n";
}

}  // namespace rpdp::cli
