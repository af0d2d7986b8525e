#include "stabprobe/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace stabprobe {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 650.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 420.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

void text(std::ostringstream& os, double x, double y, const std::string& s,
          const std::string& anchor = "middle", int size = 12,
          const std::string& fill = "#333333") {
  os << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size
     << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\" fill=\"" << fill
     << "\">" << s << "</text>\n";
}

void line(std::ostringstream& os, double x1, double y1, double x2, double y2,
          const std::string& stroke, double width = 1.0) {
  os << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
     << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
     << num(width) << "\"/>\n";
}

// Five-stop dark-to-bright map for the heatmap.
std::string heat_color(double t) {
  static const double stops[5][3] = {{48, 18, 59},
                                     {70, 107, 227},
                                     {40, 187, 236},
                                     {175, 240, 91},
                                     {249, 248, 113}};
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 4.0;
  const int lo = std::min(3, static_cast<int>(pos));
  const double frac = pos - lo;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[lo][0] + frac * (stops[lo + 1][0] - stops[lo][0]))),
                static_cast<int>(std::lround(stops[lo][1] + frac * (stops[lo + 1][1] - stops[lo][1]))),
                static_cast<int>(std::lround(stops[lo][2] + frac * (stops[lo + 1][2] - stops[lo][2]))));
  return buf;
}

}  // namespace

std::string sweep_svg(const GridResult& g, const std::string& title, const std::string& x_label) {
  const std::size_t count = g.cols();
  double x_min = g.col_values.front();
  double x_max = g.col_values.back();
  if (x_min == x_max) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  double y_max = 0.0;
  double api_max = 0.0;
  bool has_api = false;
  for (const GridCell& c : g.cells) {
    y_max = std::max(y_max, c.probe_mean + c.probe_std);
    if (c.api_mean) {
      has_api = true;
      api_max = std::max(api_max, *c.api_mean + *c.api_std);
    }
  }
  if (y_max <= 0.0) {
    y_max = 1.0;
  }
  y_max *= 1.05;
  if (api_max <= 0.0) {
    api_max = 1.0;
  }
  api_max *= 1.05;

  auto sx = [&](double v) { return kLeft + (v - x_min) / (x_max - x_min) * (kRight - kLeft); };
  auto sy = [&](double v) { return kBottom - v / y_max * (kBottom - kTop); };
  auto sy_api = [&](double v) { return kBottom - v / api_max * (kBottom - kTop); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  text(os, (kLeft + kRight) / 2, 28, title, "middle", 15);

  // Axes.
  line(os, kLeft, kBottom, kRight, kBottom, "#333333", 1.2);
  line(os, kLeft, kBottom, kLeft, kTop, "#333333", 1.2);
  for (int i = 0; i <= 5; ++i) {
    const double v = y_max * i / 5.0;
    const double y = sy(v);
    line(os, kLeft - 4, y, kLeft, y, "#333333");
    text(os, kLeft - 8, y + 4, tick_label(v), "end", 11);
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double x = sx(g.col_values[i]);
    line(os, x, kBottom, x, kBottom + 4, "#333333");
    text(os, x, kBottom + 18, tick_label(g.col_values[i]), "middle", 11);
  }
  text(os, (kLeft + kRight) / 2, kBottom + 40, x_label, "middle", 13);
  text(os, 18, (kTop + kBottom) / 2, "probe", "middle", 13, "#1f5fa8");

  // Dispersion bars, then the mean polyline.
  for (std::size_t i = 0; i < count; ++i) {
    const GridCell& c = g.cell(0, i);
    const double x = sx(g.col_values[i]);
    line(os, x, sy(c.probe_mean - c.probe_std), x, sy(c.probe_mean + c.probe_std), "#1f5fa8");
    line(os, x - 4, sy(c.probe_mean - c.probe_std), x + 4, sy(c.probe_mean - c.probe_std), "#1f5fa8");
    line(os, x - 4, sy(c.probe_mean + c.probe_std), x + 4, sy(c.probe_mean + c.probe_std), "#1f5fa8");
  }
  os << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < count; ++i) {
    os << num(sx(g.col_values[i])) << "," << num(sy(g.cell(0, i).probe_mean)) << " ";
  }
  os << "\"/>\n";
  for (std::size_t i = 0; i < count; ++i) {
    os << "<circle cx=\"" << num(sx(g.col_values[i])) << "\" cy=\""
       << num(sy(g.cell(0, i).probe_mean)) << "\" r=\"3.5\" fill=\"#1f5fa8\"/>\n";
  }

  if (has_api) {
    // Secondary axis on the right.
    line(os, kRight, kBottom, kRight, kTop, "#b0501f", 1.0);
    for (int i = 0; i <= 5; ++i) {
      const double v = api_max * i / 5.0;
      const double y = sy_api(v);
      line(os, kRight, y, kRight + 4, y, "#b0501f");
      text(os, kRight + 8, y + 4, tick_label(v), "start", 11, "#b0501f");
    }
    text(os, kWidth - 14, (kTop + kBottom) / 2, "API", "middle", 13, "#b0501f");
    os << "<polyline fill=\"none\" stroke=\"#b0501f\" stroke-width=\"1.5\" "
          "stroke-dasharray=\"5,3\" points=\"";
    for (std::size_t i = 0; i < count; ++i) {
      const GridCell& c = g.cell(0, i);
      if (c.api_mean) {
        os << num(sx(g.col_values[i])) << "," << num(sy_api(*c.api_mean)) << " ";
      }
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < count; ++i) {
      const GridCell& c = g.cell(0, i);
      if (c.api_mean) {
        line(os, sx(g.col_values[i]), sy_api(*c.api_mean - *c.api_std), sx(g.col_values[i]),
             sy_api(*c.api_mean + *c.api_std), "#b0501f");
        os << "<rect x=\"" << num(sx(g.col_values[i]) - 3) << "\" y=\""
           << num(sy_api(*c.api_mean) - 3) << "\" width=\"6\" height=\"6\" fill=\"#b0501f\"/>\n";
      }
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string heatmap_svg(const GridResult& g, const std::string& title,
                        const std::string& x_label) {
  const std::size_t rows = g.rows();
  const std::size_t cols = g.cols();
  const double cell_w = (kRight - kLeft) / static_cast<double>(cols);
  const double cell_h = (kBottom - kTop) / static_cast<double>(rows);

  // log10 color range over the positive means.
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const GridCell& c : g.cells) {
    if (c.probe_mean > 0.0) {
      const double l = std::log10(c.probe_mean);
      lo = any ? std::min(lo, l) : l;
      hi = any ? std::max(hi, l) : l;
      any = true;
    }
  }
  if (!any) {
    lo = -1.0;
    hi = 0.0;
  }
  if (hi == lo) {
    hi = lo + 1.0;
  }

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "<defs>\n<pattern id=\"hatch\" width=\"6\" height=\"6\" "
        "patternTransform=\"rotate(45)\" patternUnits=\"userSpaceOnUse\">"
        "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#ffffff\" "
        "stroke-width=\"1.6\" stroke-opacity=\"0.85\"/></pattern>\n</defs>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  text(os, (kLeft + kRight) / 2, 28, title, "middle", 15);

  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double mean = g.cell(r, c).probe_mean;
      const double t = mean > 0.0 ? (std::log10(mean) - lo) / (hi - lo) : 0.0;
      const double x = kLeft + c * cell_w;
      const double y = kTop + r * cell_h;
      os << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cell_w)
         << "\" height=\"" << num(cell_h) << "\" fill=\"" << heat_color(t)
         << "\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
      if (!g.iso_band.empty() && g.iso_band[r * cols + c]) {
        os << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cell_w)
           << "\" height=\"" << num(cell_h) << "\" fill=\"url(#hatch)\"/>\n";
      }
    }
  }

  // Frontier markers joined where defined.
  std::ostringstream points;
  for (std::size_t r = 0; r < rows; ++r) {
    if (r >= g.frontier.size() || !g.frontier[r]) {
      continue;
    }
    std::size_t c = 0;
    for (std::size_t i = 0; i < cols; ++i) {
      if (static_cast<int>(std::lround(g.col_values[i])) == *g.frontier[r]) {
        c = i;
        break;
      }
    }
    const double x = kLeft + (c + 0.5) * cell_w;
    const double y = kTop + (r + 0.5) * cell_h;
    points << num(x) << "," << num(y) << " ";
    os << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y)
       << "\" r=\"5\" fill=\"black\" stroke=\"white\" stroke-width=\"1.2\"/>\n";
  }
  const std::string pts = points.str();
  if (!pts.empty()) {
    os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.6\" points=\"" << pts
       << "\"/>\n";
  }

  for (std::size_t c = 0; c < cols; ++c) {
    text(os, kLeft + (c + 0.5) * cell_w, kBottom + 18, tick_label(g.col_values[c]), "middle", 11);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    text(os, kLeft - 8, kTop + (r + 0.5) * cell_h + 4, tick_label(g.row_values[r]), "end", 11);
  }
  text(os, (kLeft + kRight) / 2, kBottom + 40, x_label, "middle", 13);
  text(os, 20, (kTop + kBottom) / 2, "p", "middle", 13);

  // Colorbar with the log10 range.
  const double bar_x = kRight + 20;
  for (int i = 0; i < 24; ++i) {
    const double t = 1.0 - static_cast<double>(i) / 23.0;
    os << "<rect x=\"" << num(bar_x) << "\" y=\"" << num(kTop + i * (kBottom - kTop) / 24.0)
       << "\" width=\"14\" height=\"" << num((kBottom - kTop) / 24.0 + 0.5) << "\" fill=\""
       << heat_color(t) << "\"/>\n";
  }
  text(os, bar_x + 7, kTop - 8, "log10", "middle", 10);
  text(os, bar_x + 20, kTop + 10, tick_label(hi), "start", 10);
  text(os, bar_x + 20, kBottom, tick_label(lo), "start", 10);
  os << "</svg>\n";
  return os.str();
}

}  // namespace stabprobe
