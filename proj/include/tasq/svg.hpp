#pragma once

#include <string>
#include <vector>

namespace tasq {

struct SvgPoint {
  double x = 0.0;
  double y = 0.0;
};

// Minimal static line chart: axes, min/max labels, one polyline.
std::string svg_line_chart(const std::vector<SvgPoint>& points, const std::string& title,
                           const std::string& x_label, const std::string& y_label);

void write_svg_file(const std::string& path, const std::string& svg);

}  // namespace tasq
