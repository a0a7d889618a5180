#include <algorithm>
#include <cstdio>
#include <ostream>

#include "rpdp/cli.hpp"
#include "rpdp/error.hpp"

namespace rpdp::cli {

namespace {

struct LevelRows {
  std::string level;
  std::vector<const BandRow*> rows;
};

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::vector<ProfileSummary> summarize(const std::vector<BandRow>& rows) {
  struct Group {
    ProfileSummary summary;
    std::vector<LevelRows> levels;
  };
  std::vector<Group> groups;
  for (const auto& r : rows) {
    auto g = std::find_if(groups.begin(), groups.end(), [&](const Group& x) {
      return x.summary.target == r.target && x.summary.feature == r.feature &&
             x.summary.group_variable == r.group_variable;
    });
    if (g == groups.end()) {
      groups.push_back({{r.target, r.feature, r.group_variable, {}, {}}, {}});
      g = groups.end() - 1;
    }
    auto l = std::find_if(g->levels.begin(), g->levels.end(),
                          [&](const LevelRows& x) { return x.level == r.group_level; });
    if (l == g->levels.end()) {
      g->levels.push_back({r.group_level, {}});
      l = g->levels.end() - 1;
    }
    l->rows.push_back(&r);
  }

  std::vector<ProfileSummary> out;
  for (auto& g : groups) {
    const auto& first = g.levels.front().rows;
    for (const auto& level : g.levels) {
      bool same = level.rows.size() == first.size();
      for (std::size_t k = 0; same && k < first.size(); ++k) {
        same = level.rows[k]->grid_value == first[k]->grid_value;
      }
      if (!same) {
        throw Error(ErrorCode::SchemaMismatch, "levels of profile '" + g.summary.feature +
                                                   "' do not share one grid");
      }
      LevelSummary s;
      s.level = level.level;
      double width = 0;
      for (std::size_t k = 0; k < level.rows.size(); ++k) {
        const BandRow& r = *level.rows[k];
        if (k == 0 || r.mean > s.peak) {
          s.peak = r.mean;
          s.argmax = r.grid_value;
        }
        width += r.upper - r.lower;
      }
      s.mean_width = width / static_cast<double>(level.rows.size());
      g.summary.levels.push_back(std::move(s));
    }
    const std::size_t L = g.levels.size();
    g.summary.dominance.assign(L, std::vector<double>(L, 0.0));
    for (std::size_t a = 0; a < L; ++a) {
      for (std::size_t b = 0; b < L; ++b) {
        std::size_t above = 0;
        for (std::size_t k = 0; k < first.size(); ++k) {
          above += g.levels[a].rows[k]->mean > g.levels[b].rows[k]->mean;
        }
        g.summary.dominance[a][b] = static_cast<double>(above) / static_cast<double>(first.size());
      }
    }
    out.push_back(std::move(g.summary));
  }
  return out;
}

void print_report(const std::vector<ProfileSummary>& summaries, std::ostream& out) {
  for (const auto& s : summaries) {
    out << s.target << " ~ " << s.feature;
    if (!s.group_variable.empty()) out << " | " << s.group_variable;
    out << '\n';
    std::size_t width = 8;
    for (const auto& l : s.levels) width = std::max(width, l.level.size() + 2);
    out << "  " << pad("level", width) << pad("peak at", 10) << pad("peak mean", 11) << "mean band width\n";
    for (const auto& l : s.levels) {
      out << "  " << pad(l.level.empty() ? "(all)" : l.level, width) << pad(l.argmax, 10)
          << pad(fixed(l.peak), 11) << fixed(l.mean_width) << '\n';
    }
    if (s.levels.size() > 1) {
      out << "  dominance (share of grid points where row mean > column mean)\n";
      out << "  " << pad("", width);
      for (const auto& l : s.levels) out << pad(l.level, width);
      out << '\n';
      for (std::size_t a = 0; a < s.levels.size(); ++a) {
        out << "  " << pad(s.levels[a].level, width);
        for (std::size_t b = 0; b < s.levels.size(); ++b) out << pad(fixed(s.dominance[a][b], 3), width);
        out << '\n';
      }
    }
    out << '\n';
  }
}

}  // namespace rpdp::cli
