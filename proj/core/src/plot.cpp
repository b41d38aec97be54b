#include "cqed/plot.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>

#include "cqed/error.hpp"

namespace cqed {
namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string fixed(double x, int digits = 2) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed, digits);
  return {buf, res.ptr};
}

std::string tick(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 5);
  return {buf, res.ptr};
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi == lo) {
      const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 1e-3;
      lo -= pad;
      hi += pad;
    }
  }
};

std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth, 0) +
         "\" height=\"" + fixed(kHeight, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + "<text x=\"" +
         fixed(kWidth / 2, 0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(title) + "</text>\n";
}

std::string axes(const Range& xr, const Range& yr, const std::string& xl, const std::string& yl) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::string s = "<rect x=\"" + fixed(x0) + "\" y=\"" + fixed(y1) + "\" width=\"" +
                  fixed(x1 - x0) + "\" height=\"" + fixed(y0 - y1) +
                  "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0;
    const double fy = y0 - (y0 - y1) * k / 4.0;
    s += "<text x=\"" + fixed(fx) + "\" y=\"" + fixed(y0 + 16) + "\" text-anchor=\"middle\">" +
         tick(xr.lo + (xr.hi - xr.lo) * k / 4.0) + "</text>\n";
    s += "<text x=\"" + fixed(x0 - 6) + "\" y=\"" + fixed(fy + 4) + "\" text-anchor=\"end\">" +
         tick(yr.lo + (yr.hi - yr.lo) * k / 4.0) + "</text>\n";
  }
  s += "<text x=\"" + fixed((x0 + x1) / 2) + "\" y=\"" + fixed(kHeight - 12) +
       "\" text-anchor=\"middle\">" + escape(xl) + "</text>\n";
  s += "<text x=\"16\" y=\"" + fixed((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fixed((y0 + y1) / 2) + ")\">" + escape(yl) + "</text>\n";
  return s;
}

const std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c",
                                          "#9467bd", "#ff7f0e", "#17becf"};

// viridis anchor points
const std::array<std::array<double, 3>, 5> kViridis{{{68, 1, 84},
                                                     {59, 82, 139},
                                                     {33, 145, 140},
                                                     {94, 201, 98},
                                                     {253, 231, 37}}};

std::string color(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  const double pos = t * (kViridis.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), kViridis.size() - 2);
  const double f = pos - static_cast<double>(i);
  char buf[8];
  std::string out = "#";
  for (int c = 0; c < 3; ++c) {
    const int v = static_cast<int>(std::lround(kViridis[i][c] + f * (kViridis[i + 1][c] - kViridis[i][c])));
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, 16);
    if (res.ptr - buf == 1) out += '0';
    out.append(buf, res.ptr);
  }
  return out;
}

}  // namespace

std::string line_plot_svg(const std::vector<Series>& series, const std::string& x_label,
                          const std::string& y_label, const std::string& title) {
  Range xr, yr;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw InputError("plot series length mismatch");
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.finish();
  yr.finish();
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::string svg = header(title) + axes(xr, yr, x_label, y_label);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::string path;
    bool pen_up = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        pen_up = true;
        continue;
      }
      const double px = x0 + (s.x[i] - xr.lo) / (xr.hi - xr.lo) * (x1 - x0);
      const double py = y0 - (s.y[i] - yr.lo) / (yr.hi - yr.lo) * (y0 - y1);
      path += (pen_up ? "M" : "L") + fixed(px) + "," + fixed(py) + " ";
      pen_up = false;
    }
    const char* col = kPalette[k % kPalette.size()];
    svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + col + "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + fixed(x1 - 4) + "\" y=\"" + fixed(y1 + 16 + 14 * k) +
           "\" text-anchor=\"end\" fill=\"" + col + "\">" + escape(s.label) + "</text>\n";
  }
  return svg + "</svg>\n";
}

std::string heatmap_svg(const Grid2D& g, const std::string& title) {
  validate(g);
  Range xr, yr, zr;
  for (double v : g.fast) xr.add(v);
  for (double v : g.slow) yr.add(v);
  for (Eigen::Index r = 0; r < g.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.values.cols(); ++c) zr.add(g.values(r, c));
  }
  xr.finish();
  yr.finish();
  zr.finish();
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  const auto rows = g.values.rows(), cols = g.values.cols();
  const double cw = (x1 - x0) / static_cast<double>(std::max<Eigen::Index>(cols, 1));
  const double ch = (y0 - y1) / static_cast<double>(std::max<Eigen::Index>(rows, 1));
  std::string svg = header(title);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double t = (g.values(r, c) - zr.lo) / (zr.hi - zr.lo);
      svg += "<rect x=\"" + fixed(x0 + c * cw) + "\" y=\"" + fixed(y0 - (r + 1) * ch) +
             "\" width=\"" + fixed(cw + 0.05) + "\" height=\"" + fixed(ch + 0.05) + "\" fill=\"" +
             color(t) + "\"/>\n";
    }
  }
  svg += axes(xr, yr, g.fast_name, g.slow_name);
  return svg + "</svg>\n";
}

}  // namespace cqed
