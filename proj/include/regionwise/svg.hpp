#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace regionwise {

// Fixed diagnosis palette shared by every plot.
extern const char* const kColorCN;
extern const char* const kColorMCI;
extern const char* const kColorAD;

// Minimal SVG chart writer: axes with round-number ticks, polylines,
// scatter points, horizontal rules, and a legend. Output bytes depend only
// on the data added, so plots diff cleanly across runs.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  // Overrides the automatic data-driven axis range.
  void set_x_range(double lo, double hi);
  void set_y_range(double lo, double hi);

  void add_polyline(std::vector<double> x, std::vector<double> y, std::string color,
                    std::string label = "");
  void add_points(std::vector<double> x, std::vector<double> y, std::string color,
                  std::string label = "");
  void add_hline(double y, std::string color, bool dashed, std::string label = "");

  void write(std::ostream& os) const;
  void write(const std::string& path) const;

 private:
  struct Series {
    enum class Kind { line, points, hline };
    Kind kind;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;
    std::string label;
    bool dashed = false;
  };

  std::string title_;
  std::string x_label_;
  std::string y_label_;
  std::vector<Series> series_;
  bool has_x_range_ = false;
  bool has_y_range_ = false;
  double x_lo_ = 0.0, x_hi_ = 1.0;
  double y_lo_ = 0.0, y_hi_ = 1.0;
};

}  // namespace regionwise
