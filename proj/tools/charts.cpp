#include "charts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cotlab::pipeline {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 930.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 370.0;

const char* kPalette[] = {"#4878a8", "#e0883a", "#58a06a", "#b35d5d",
                          "#8469a8", "#b0a03c", "#5aa0b0", "#a06a9a"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return std::string(buf);
}

std::string escape_text(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

void open_svg(std::ostringstream& svg, const std::string& title) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape_text(title) << "</text>\n";
}

void y_axis(std::ostringstream& svg, double y_min, double y_max,
            const std::string& label) {
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kBottom << "\" stroke=\"#333\"/>\n";
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double value = y_min + (y_max - y_min) * i / ticks;
    const double y = kBottom - (value - y_min) / (y_max - y_min) * (kBottom - kTop);
    svg << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << fmt(y) << "\" x2=\"" << kRight
        << "\" y2=\"" << fmt(y) << "\" stroke=\"#ddd\"/>\n";
    char tick[16];
    std::snprintf(tick, sizeof(tick), "%.2f", value);
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick
        << "</text>\n";
  }
  svg << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 18 " << (kTop + kBottom) / 2 << ")\">" << escape_text(label)
      << "</text>\n";
}

}  // namespace

std::string render_bar_chart(const std::string& title, const std::vector<BarGroup>& groups) {
  std::ostringstream svg;
  open_svg(svg, title);
  y_axis(svg, 0.0, 1.0, "accuracy");

  const std::size_t n_groups = std::max<std::size_t>(1, groups.size());
  const double group_width = (kRight - kLeft) / static_cast<double>(n_groups);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& group = groups[g];
    const double gx = kLeft + group_width * static_cast<double>(g);
    const std::size_t n_bars = std::max<std::size_t>(1, group.bars.size());
    const double bar_width = group_width * 0.8 / static_cast<double>(n_bars);
    for (std::size_t i = 0; i < group.bars.size(); ++i) {
      const auto& bar = group.bars[i];
      const double clamped = std::clamp(bar.value, 0.0, 1.0);
      const double h = clamped * (kBottom - kTop);
      const double x = gx + group_width * 0.1 + bar_width * static_cast<double>(i);
      svg << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(kBottom - h) << "\" width=\""
          << fmt(bar_width * 0.9) << "\" height=\"" << fmt(h) << "\" fill=\""
          << kPalette[i % std::size(kPalette)] << "\"/>\n";
      svg << "<text x=\"" << fmt(x + bar_width * 0.45) << "\" y=\"" << fmt(kBottom - h - 4)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">"
          << fmt(bar.value).substr(0, 6) << "</text>\n";
      svg << "<text x=\"" << fmt(x + bar_width * 0.45) << "\" y=\"" << fmt(kBottom + 12)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">"
          << escape_text(bar.name) << "</text>\n";
    }
    svg << "<text x=\"" << fmt(gx + group_width / 2) << "\" y=\"" << fmt(kBottom + 28)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape_text(group.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_gr_chart(const std::string& title, const std::vector<GrSeries>& series) {
  std::ostringstream svg;
  open_svg(svg, title);

  double x_min = 1.0;
  double x_max = 2.0;
  double y_min = 0.0;
  double y_max = 1.05;
  bool any = false;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!any) {
        x_min = x_max = x;
        any = true;
      }
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y + 0.05);
    }
  }
  if (x_max <= x_min) x_max = x_min + 1.0;

  const auto tx = [&](double x) {
    return kLeft + (std::log(x) - std::log(x_min)) / (std::log(x_max) - std::log(x_min)) *
                       (kRight - kLeft);
  };
  const auto ty = [&](double y) {
    return kBottom - (y - y_min) / (y_max - y_min) * (kBottom - kTop);
  };

  // shade the not-yet-recovered half
  svg << "<rect x=\"" << kLeft << "\" y=\"" << fmt(ty(0.5)) << "\" width=\""
      << fmt(kRight - kLeft) << "\" height=\"" << fmt(kBottom - ty(0.5))
      << "\" fill=\"#f3f3f3\"/>\n";
  y_axis(svg, y_min, y_max, "gap recovery");
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(ty(0.5)) << "\" x2=\"" << kRight
      << "\" y2=\"" << fmt(ty(0.5)) << "\" stroke=\"#999\" stroke-dasharray=\"5,4\"/>\n";

  std::vector<double> xticks;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) xticks.push_back(x);
  }
  std::sort(xticks.begin(), xticks.end());
  xticks.erase(std::unique(xticks.begin(), xticks.end()), xticks.end());
  for (const double x : xticks) {
    char tick[16];
    std::snprintf(tick, sizeof(tick), "%g", x);
    svg << "<text x=\"" << fmt(tx(x)) << "\" y=\"" << fmt(kBottom + 14)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick
        << "</text>\n";
  }
  svg << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << fmt(kBottom + 30)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << "block size n</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& line = series[s];
    const char* color = kPalette[s % std::size(kPalette)];
    std::ostringstream path;
    for (std::size_t i = 0; i < line.points.size(); ++i) {
      path << (i == 0 ? "M" : "L") << fmt(tx(line.points[i].first)) << ","
           << fmt(ty(line.points[i].second));
    }
    svg << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    for (const auto& [x, y] : line.points) {
      svg << "<circle cx=\"" << fmt(tx(x)) << "\" cy=\"" << fmt(ty(y))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    if (line.critical_x) {
      svg << "<circle cx=\"" << fmt(tx(*line.critical_x)) << "\" cy=\"" << fmt(ty(0.5))
          << "\" r=\"7\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    }
    svg << "<text x=\"" << fmt(kRight - 120) << "\" y=\"" << fmt(kTop + 16.0 * (s + 1))
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">"
        << escape_text(line.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace cotlab::pipeline
