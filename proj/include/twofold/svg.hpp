#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "twofold/core.hpp"
#include "twofold/jsonio.hpp"

namespace twofold {

// Minimal line-plot writer so scenario outputs are viewable without tooling.
struct SvgSeries {
  std::vector<Vec2> points;
  std::string color = "#1f6fb2";
  double width = 1.2;
};

inline std::string render_svg_plot(const std::vector<SvgSeries>& series, const std::string& title,
                                   const std::string& x_label, const std::string& y_label) {
  const double w = 640, h = 480, ml = 64, mr = 16, mt = 36, mb = 44;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      if (!std::isfinite(p[0]) || !std::isfinite(p[1])) continue;
      if (first) {
        x0 = x1 = p[0];
        y0 = y1 = p[1];
        first = false;
      }
      x0 = std::min(x0, p[0]);
      x1 = std::max(x1, p[0]);
      y0 = std::min(y0, p[1]);
      y1 = std::max(y1, p[1]);
    }
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  out += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\" "
                "text-anchor=\"middle\">",
                0.5 * w);
  out += buf;
  out += title + "</text>\n";

  for (int i = 0; i <= 4; ++i) {
    double xv = x0 + (x1 - x0) * i / 4.0;
    double yv = y0 + (y1 - y0) * i / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#ddd\"/>\n", px(xv),
                  py(y0), px(xv), py(y1));
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#ddd\"/>\n", px(x0),
                  py(yv), px(x1), py(yv));
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"10\" "
                  "text-anchor=\"middle\">%.4g</text>\n",
                  px(xv), h - mb + 16, xv);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"10\" "
                  "text-anchor=\"end\">%.4g</text>\n",
                  ml - 6, py(yv) + 3, yv);
    out += buf;
  }
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" "
                "stroke=\"#333\"/>\n",
                ml, mt, w - ml - mr, h - mt - mb);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\" "
                "text-anchor=\"middle\">",
                0.5 * w, h - 10);
  out += buf;
  out += x_label + "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"14\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\" "
                "text-anchor=\"middle\" transform=\"rotate(-90 14 %g)\">",
                0.5 * h, 0.5 * h);
  out += buf;
  out += y_label + "</text>\n";

  for (const auto& s : series) {
    if (s.points.empty()) continue;
    out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"" +
           fmt_g17(s.width) + "\" points=\"";
    for (const auto& p : s.points) {
      if (!std::isfinite(p[0]) || !std::isfinite(p[1])) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(p[0]), py(p[1]));
      out += buf;
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace twofold
