#include "tasq/svg.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tasq/error.hpp"

namespace tasq {

std::string svg_line_chart(const std::vector<SvgPoint>& points, const std::string& title,
                           const std::string& x_label, const std::string& y_label) {
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 400.0;
  constexpr double kMargin = 56.0;
  double min_x = 0.0;
  double max_x = 1.0;
  double min_y = 0.0;
  double max_y = 1.0;
  if (!points.empty()) {
    min_x = max_x = points.front().x;
    min_y = max_y = points.front().y;
    for (const SvgPoint& p : points) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
  }
  if (max_x == min_x) max_x = min_x + 1.0;
  if (max_y == min_y) max_y = min_y + 1.0;
  const auto sx = [&](double x) {
    return kMargin + (x - min_x) / (max_x - min_x) * (kWidth - 2 * kMargin);
  };
  const auto sy = [&](double y) {
    return kHeight - kMargin - (y - min_y) / (max_y - min_y) * (kHeight - 2 * kMargin);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
  // axes
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\""
      << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
      << kHeight - kMargin << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << kHeight / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << kHeight / 2
      << ")\">" << y_label << "</text>\n";
  out << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin + 16
      << "\" font-size=\"10\" text-anchor=\"middle\">" << min_x << "</text>\n";
  out << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kHeight - kMargin + 16
      << "\" font-size=\"10\" text-anchor=\"middle\">" << max_x << "</text>\n";
  out << "<text x=\"" << kMargin - 6 << "\" y=\"" << kHeight - kMargin + 4
      << "\" font-size=\"10\" text-anchor=\"end\">" << min_y << "</text>\n";
  out << "<text x=\"" << kMargin - 6 << "\" y=\"" << kMargin + 4
      << "\" font-size=\"10\" text-anchor=\"end\">" << max_y << "</text>\n";
  if (!points.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (const SvgPoint& p : points) out << sx(p.x) << ',' << sy(p.y) << ' ';
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_svg_file(const std::string& path, const std::string& svg) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path + " for writing");
  out << svg;
}

}  // namespace tasq
