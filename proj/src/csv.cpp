#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "rpdp/dataset.hpp"
#include "rpdp/error.hpp"

namespace rpdp {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string cell(std::size_t row, const std::string& column) {
  return "row " + std::to_string(row) + ", column '" + column + "'";
}

double parse_numeric(std::string_view text, std::size_t row, const std::string& column) {
  double v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec == std::errc::result_out_of_range) {
    throw Error(ErrorCode::NonFiniteNumeric, cell(row, column) + ": value '" +
                                                 std::string(text) + "' overflows");
  }
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::InvalidNumeric,
                cell(row, column) + ": '" + std::string(text) + "' is not a number");
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::NonFiniteNumeric,
                cell(row, column) + ": non-finite value '" + std::string(text) + "'");
  }
  return v;
}

int parse_score(std::string_view text, std::size_t row, const std::string& column) {
  int v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::InvalidNumeric,
                cell(row, column) + ": '" + std::string(text) + "' is not an integer score");
  }
  return v;
}

struct ColumnSlot {
  bool is_target = false;
  std::size_t index = 0;
};

}  // namespace

Dataset read_csv(std::istream& in, std::shared_ptr<const Schema> schema) {
  const Schema& s = *schema;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyDataset, "CSV has no header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_fields(line);
  std::vector<ColumnSlot> slots;
  std::vector<bool> seen_feature(s.width(), false);
  std::vector<bool> seen_target(s.targets().size(), false);
  for (auto name : header) {
    if (auto j = s.find_feature(name)) {
      if (seen_feature[*j]) {
        throw Error(ErrorCode::InvalidSchema, "duplicate column '" + std::string(name) + "'");
      }
      seen_feature[*j] = true;
      slots.push_back({false, *j});
    } else if (auto t = s.find_target(name)) {
      if (seen_target[*t]) {
        throw Error(ErrorCode::InvalidSchema, "duplicate column '" + std::string(name) + "'");
      }
      seen_target[*t] = true;
      slots.push_back({true, *t});
    } else {
      throw Error(ErrorCode::UnknownColumn,
                  "column '" + std::string(name) + "' is not declared in the schema");
    }
  }
  for (std::size_t j = 0; j < s.width(); ++j) {
    if (!seen_feature[j]) {
      throw Error(ErrorCode::MissingColumn, "missing column '" + s.features()[j].name + "'");
    }
  }
  for (std::size_t t = 0; t < s.targets().size(); ++t) {
    if (!seen_target[t]) {
      throw Error(ErrorCode::MissingColumn, "missing column '" + s.targets()[t].name + "'");
    }
  }

  const std::size_t p = s.width();
  const std::size_t nt = s.targets().size();
  std::vector<double> values;
  std::vector<int> scores;
  std::vector<double> row_values(p);
  std::vector<int> row_scores(nt);
  std::size_t row = 0;
  bool trailing_blank = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      trailing_blank = true;
      continue;
    }
    ++row;
    if (trailing_blank) {
      throw Error(ErrorCode::MissingValue, "row " + std::to_string(row - 1) + " is blank");
    }
    const auto fields = split_fields(line);
    if (fields.size() != slots.size()) {
      throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(row) + " has " +
                                                 std::to_string(fields.size()) + " fields, expected " +
                                                 std::to_string(slots.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto field = fields[c];
      const auto& slot = slots[c];
      const std::string& name =
          slot.is_target ? s.targets()[slot.index].name : s.features()[slot.index].name;
      if (field.empty()) throw Error(ErrorCode::MissingValue, cell(row, name) + ": missing value");
      if (slot.is_target) {
        const int v = parse_score(field, row, name);
        const auto& range = s.targets()[slot.index];
        if (v < range.lo || v > range.hi) {
          throw Error(ErrorCode::OutOfRange, cell(row, name) + ": score " + std::to_string(v) +
                                                 " outside " + std::to_string(range.lo) + ".." +
                                                 std::to_string(range.hi));
        }
        row_scores[slot.index] = v;
        continue;
      }
      const auto& f = s.features()[slot.index];
      if (f.is_categorical()) {
        auto level = s.find_level(slot.index, field);
        if (!level) {
          throw Error(ErrorCode::UnknownLevel,
                      cell(row, name) + ": unknown level '" + std::string(field) + "'");
        }
        row_values[slot.index] = static_cast<double>(*level);
      } else {
        const double v = parse_numeric(field, row, name);
        if ((f.min && v < *f.min) || (f.max && v > *f.max)) {
          throw Error(ErrorCode::OutOfRange, cell(row, name) + ": value " + std::string(field) +
                                                 " outside declared range");
        }
        row_values[slot.index] = v;
      }
    }
    values.insert(values.end(), row_values.begin(), row_values.end());
    scores.insert(scores.end(), row_scores.begin(), row_scores.end());
  }
  if (row == 0) throw Error(ErrorCode::EmptyDataset, "CSV has a header but no data rows");
  return Dataset(std::move(schema), std::move(values), std::move(scores));
}

Dataset load_csv(const std::string& path, std::shared_ptr<const Schema> schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open data file '" + path + "'");
  return read_csv(in, std::move(schema));
}

void write_csv(const Dataset& data, std::ostream& out) {
  const Schema& s = data.schema();
  bool first = true;
  auto sep = [&] {
    if (!first) out << ',';
    first = false;
  };
  for (const auto& f : s.features()) {
    sep();
    out << f.name;
  }
  for (const auto& t : s.targets()) {
    sep();
    out << t.name;
  }
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    first = true;
    for (std::size_t j = 0; j < s.width(); ++j) {
      sep();
      out << s.format_value(j, data.value(i, j));
    }
    for (std::size_t t = 0; t < s.targets().size(); ++t) {
      sep();
      out << data.score(i, t);
    }
    out << '\n';
  }
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  write_csv(data, out);
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

}  // namespace rpdp
