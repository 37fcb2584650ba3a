#ifndef MOSTV_SVG_HPP_
#define MOSTV_SVG_HPP_

#include <optional>
#include <string>
#include <vector>

namespace mostv {

// Line/point chart emitted as standalone SVG. Output is deterministic:
// fixed palette, fixed precision, no timestamps.
struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool draw_line = true;
  bool draw_markers = true;
};

struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  std::optional<double> y_min, y_max;
  int width = 720;
  int height = 480;

  std::string render() const;
  void write(const std::string& path) const;
};

}  // namespace mostv

#endif  // MOSTV_SVG_HPP_
