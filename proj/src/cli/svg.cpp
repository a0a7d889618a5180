#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rpdp/cli.hpp"

namespace rpdp::cli {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 64, kRight = 150, kTop = 36, kBottom = 52;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const PairBands& pb, const std::string& y_label) {
  const Grid& grid = pb.bands.front().grid;
  const std::size_t K = grid.size();

  double lo = 1, hi = 0;
  for (const auto& b : pb.bands) {
    lo = std::min(lo, *std::min_element(b.lower.begin(), b.lower.end()));
    hi = std::max(hi, *std::max_element(b.upper.begin(), b.upper.end()));
  }
  lo = std::max(0.0, std::floor(lo * 10) / 10);
  hi = std::min(1.0, std::ceil(hi * 10) / 10);
  if (hi <= lo) {
    hi = std::min(1.0, lo + 0.1);
    lo = hi - 0.1;
  }

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto x_of = [&](std::size_t k) {
    if (K == 1) return kLeft + plot_w / 2;
    if (grid.categorical) return kLeft + plot_w * (static_cast<double>(k) + 0.5) / static_cast<double>(K);
    const double span = grid.points.back() - grid.points.front();
    return kLeft + plot_w * (grid.points[k] - grid.points.front()) / span;
  };
  auto y_of = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::string title = grid.feature;
  if (pb.pair.group) title += " by " + *pb.pair.group;
  s << "<text x=\"" << num(kLeft) << "\" y=\"22\" font-size=\"14\">" << escape(title) << "</text>\n";

  // Axes, y ticks every 0.1.
  s << "<g stroke=\"#333\" fill=\"none\"><path d=\"M" << num(kLeft) << ' ' << num(kTop) << " V"
    << num(kTop + plot_h) << " H" << num(kLeft + plot_w) << "\"/></g>\n";
  for (int t = static_cast<int>(std::lround(lo * 10)); t <= static_cast<int>(std::lround(hi * 10)); ++t) {
    const double y = y_of(t / 10.0);
    s << "<line x1=\"" << num(kLeft - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + plot_w)
      << "\" y2=\"" << num(y) << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
      << num(t / 10.0).substr(0, 3) << "</text>\n";
  }
  const std::size_t step = grid.categorical ? 1 : std::max<std::size_t>(1, (K + 7) / 8);
  for (std::size_t k = 0; k < K; k += step) {
    s << "<text x=\"" << num(x_of(k)) << "\" y=\"" << num(kTop + plot_h + 16)
      << "\" text-anchor=\"middle\">" << escape(grid.labels[k]) << "</text>\n";
  }
  s << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 10)
    << "\" text-anchor=\"middle\">" << escape(grid.feature) << "</text>\n";
  s << "<text transform=\"translate(16 " << num(kTop + plot_h / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";

  for (std::size_t l = 0; l < pb.bands.size(); ++l) {
    const auto& b = pb.bands[l];
    const char* colour = kPalette[l % std::size(kPalette)];
    std::ostringstream band, line;
    for (std::size_t k = 0; k < K; ++k) band << (k ? " L" : "M") << num(x_of(k)) << ' ' << num(y_of(b.upper[k]));
    for (std::size_t k = K; k-- > 0;) band << " L" << num(x_of(k)) << ' ' << num(y_of(b.lower[k]));
    for (std::size_t k = 0; k < K; ++k) line << (k ? " L" : "M") << num(x_of(k)) << ' ' << num(y_of(b.mean[k]));
    s << "<path d=\"" << band.str() << " Z\" fill=\"" << colour << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    s << "<path d=\"" << line.str() << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    if (grid.categorical) {
      for (std::size_t k = 0; k < K; ++k) {
        s << "<circle cx=\"" << num(x_of(k)) << "\" cy=\"" << num(y_of(b.mean[k])) << "\" r=\"3\" fill=\""
          << colour << "\"/>\n";
      }
    }
    const double ly = kTop + 12 + 18 * static_cast<double>(l);
    const double lx = kLeft + plot_w + 14;
    s << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly - 9) << "\" width=\"12\" height=\"12\" fill=\"" << colour
      << "\"/>\n";
    s << "<text x=\"" << num(lx + 18) << "\" y=\"" << num(ly + 1) << "\">"
      << escape(b.group_level.value_or("all")) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace rpdp::cli
