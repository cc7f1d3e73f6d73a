#include "regionwise/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "regionwise/errors.hpp"

namespace regionwise {

const char* const kColorCN = "#1f77b4";
const char* const kColorMCI = "#ff7f0e";
const char* const kColorAD = "#d62728";

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 18;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 56;
constexpr int kPlotW = kWidth - kMarginLeft - kMarginRight;
constexpr int kPlotH = kHeight - kMarginTop - kMarginBottom;

std::string fmt(const char* pattern, double a) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), pattern, a);
  return buf;
}

std::string fmt2(const char* pattern, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

// Tick step of the form {1,2,5}*10^k giving 4..8 ticks over the span.
double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  double step;
  if (norm < 1.5) {
    step = 1.0;
  } else if (norm < 3.5) {
    step = 2.0;
  } else if (norm < 7.5) {
    step = 5.0;
  } else {
    step = 10.0;
  }
  return step * mag;
}

std::string escape_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::set_x_range(double lo, double hi) {
  has_x_range_ = true;
  x_lo_ = lo;
  x_hi_ = hi;
}

void SvgPlot::set_y_range(double lo, double hi) {
  has_y_range_ = true;
  y_lo_ = lo;
  y_hi_ = hi;
}

void SvgPlot::add_polyline(std::vector<double> x, std::vector<double> y, std::string color,
                           std::string label) {
  if (x.size() != y.size()) throw InputError("polyline x and y differ in length");
  Series s;
  s.kind = Series::Kind::line;
  s.x = std::move(x);
  s.y = std::move(y);
  s.color = std::move(color);
  s.label = std::move(label);
  series_.push_back(std::move(s));
}

void SvgPlot::add_points(std::vector<double> x, std::vector<double> y, std::string color,
                         std::string label) {
  if (x.size() != y.size()) throw InputError("scatter x and y differ in length");
  Series s;
  s.kind = Series::Kind::points;
  s.x = std::move(x);
  s.y = std::move(y);
  s.color = std::move(color);
  s.label = std::move(label);
  series_.push_back(std::move(s));
}

void SvgPlot::add_hline(double y, std::string color, bool dashed, std::string label) {
  Series s;
  s.kind = Series::Kind::hline;
  s.y.push_back(y);
  s.color = std::move(color);
  s.label = std::move(label);
  s.dashed = dashed;
  series_.push_back(std::move(s));
}

void SvgPlot::write(std::ostream& os) const {
  double x_lo = x_lo_, x_hi = x_hi_, y_lo = y_lo_, y_hi = y_hi_;
  if (!has_x_range_ || !has_y_range_) {
    bool any_x = false;
    bool any_y = false;
    double ax_lo = 0.0, ax_hi = 1.0, ay_lo = 0.0, ay_hi = 1.0;
    for (const Series& s : series_) {
      for (double v : s.x) {
        ax_lo = any_x ? std::min(ax_lo, v) : v;
        ax_hi = any_x ? std::max(ax_hi, v) : v;
        any_x = true;
      }
      for (double v : s.y) {
        ay_lo = any_y ? std::min(ay_lo, v) : v;
        ay_hi = any_y ? std::max(ay_hi, v) : v;
        any_y = true;
      }
    }
    if (!has_x_range_ && any_x) {
      x_lo = ax_lo;
      x_hi = ax_hi;
    }
    if (!has_y_range_ && any_y) {
      y_lo = ay_lo;
      y_hi = ay_hi;
    }
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  // A little headroom so strokes at the extremes are not clipped.
  const double x_pad = 0.02 * (x_hi - x_lo);
  const double y_pad = 0.04 * (y_hi - y_lo);
  if (!has_x_range_) {
    x_lo -= x_pad;
    x_hi += x_pad;
  }
  if (!has_y_range_) {
    y_lo -= y_pad;
    y_hi += y_pad;
  }

  const auto px = [&](double x) {
    return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * kPlotW;
  };
  const auto py = [&](double y) {
    return kMarginTop + kPlotH - (y - y_lo) / (y_hi - y_lo) * kPlotH;
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" "
        "text-anchor=\"middle\">"
     << escape_text(title_) << "</text>\n";

  // Frame.
  os << fmt2("<rect x=\"%.2f\" y=\"%.2f\" ", double(kMarginLeft), double(kMarginTop))
     << "width=\"" << kPlotW << "\" height=\"" << kPlotH
     << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";

  // Ticks and grid lines.
  const double x_step = nice_step(x_hi - x_lo);
  const double y_step = nice_step(y_hi - y_lo);
  for (double t = std::ceil(x_lo / x_step) * x_step; t <= x_hi + 1e-9 * x_step; t += x_step) {
    const double x = px(t);
    os << fmt2("<line x1=\"%.2f\" y1=\"%.2f\" ", x, double(kMarginTop))
       << fmt2("x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n", x,
               double(kMarginTop + kPlotH));
    os << fmt2("<line x1=\"%.2f\" y1=\"%.2f\" ", x, double(kMarginTop + kPlotH))
       << fmt2("x2=\"%.2f\" y2=\"%.2f\" stroke=\"#444444\" stroke-width=\"1\"/>\n", x,
               double(kMarginTop + kPlotH + 5));
    os << fmt2("<text x=\"%.2f\" y=\"%.2f\" ", x, double(kMarginTop + kPlotH + 20))
       << "font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
       << fmt("%.6g", t == 0.0 ? 0.0 : t) << "</text>\n";
  }
  for (double t = std::ceil(y_lo / y_step) * y_step; t <= y_hi + 1e-9 * y_step; t += y_step) {
    const double y = py(t);
    os << fmt2("<line x1=\"%.2f\" y1=\"%.2f\" ", double(kMarginLeft), y)
       << fmt2("x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
               double(kMarginLeft + kPlotW), y)
       << fmt2("<line x1=\"%.2f\" y1=\"%.2f\" ", double(kMarginLeft - 5), y)
       << fmt2("x2=\"%.2f\" y2=\"%.2f\" stroke=\"#444444\" stroke-width=\"1\"/>\n",
               double(kMarginLeft), y)
       << fmt2("<text x=\"%.2f\" y=\"%.2f\" ", double(kMarginLeft - 9), y + 4)
       << "font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
       << fmt("%.6g", t == 0.0 ? 0.0 : t) << "</text>\n";
  }

  os << "<text x=\"" << kMarginLeft + kPlotW / 2 << "\" y=\"" << kHeight - 12
     << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
     << escape_text(x_label_) << "</text>\n";
  os << "<text x=\"18\" y=\"" << kMarginTop + kPlotH / 2
     << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 18 "
     << kMarginTop + kPlotH / 2 << ")\">" << escape_text(y_label_) << "</text>\n";

  for (const Series& s : series_) {
    if (s.kind == Series::Kind::hline) {
      os << fmt2("<line x1=\"%.2f\" y1=\"%.2f\" ", double(kMarginLeft), py(s.y[0]))
         << fmt2("x2=\"%.2f\" y2=\"%.2f\" stroke=\"", double(kMarginLeft + kPlotW), py(s.y[0]))
         << s.color << "\" stroke-width=\"1.5\""
         << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    } else if (s.kind == Series::Kind::line) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color
         << "\" stroke-width=\"1.8\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        os << fmt2(i ? " %.2f,%.2f" : "%.2f,%.2f", px(s.x[i]), py(s.y[i]));
      }
      os << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        os << fmt2("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"", px(s.x[i]), py(s.y[i]))
           << s.color << "\" fill-opacity=\"0.75\"/>\n";
      }
    }
  }

  // Legend for labelled series, upper right inside the frame.
  int row = 0;
  for (const Series& s : series_) {
    if (s.label.empty()) continue;
    const double lx = kMarginLeft + kPlotW - 215;
    const double ly = kMarginTop + 16 + 18 * row;
    if (s.kind == Series::Kind::points) {
      os << fmt2("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"", lx + 12, ly - 4)
         << s.color << "\"/>\n";
    } else {
      os << fmt2("<line x1=\"%.2f\" y1=\"%.2f\" ", lx, ly - 4)
         << fmt2("x2=\"%.2f\" y2=\"%.2f\" stroke=\"", lx + 24, ly - 4) << s.color
         << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    }
    os << fmt2("<text x=\"%.2f\" y=\"%.2f\" ", lx + 30, ly)
       << "font-family=\"sans-serif\" font-size=\"12\">" << escape_text(s.label) << "</text>\n";
    ++row;
  }

  os << "</svg>\n";
}

void SvgPlot::write(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  write(os);
  if (!os.good()) throw IoError("failed writing: " + path);
}

}  // namespace regionwise
