#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cotlab::pipeline {

struct Bar {
  std::string name;
  double value = 0.0;
};

struct BarGroup {
  std::string label;  // e.g. dataset name
  std::vector<Bar> bars;
};

// Grouped accuracy bars, y fixed to [0, 1]. Output is deterministic.
std::string render_bar_chart(const std::string& title, const std::vector<BarGroup>& groups);

struct GrSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (n, GR)
  std::optional<double> critical_x;               // n* marker
};

// GR curves over the block-size grid with the sub-0.5 region shaded.
std::string render_gr_chart(const std::string& title, const std::vector<GrSeries>& series);

}  // namespace cotlab::pipeline
