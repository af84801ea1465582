#include "spsa/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "spsa/errors.hpp"
#include "spsa/io_util.hpp"

namespace spsa {

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + tmp);
    out << content;
    if (!out.good()) throw Error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("atomic rename failed: " + path);
}

SvgPlot::SvgPlot(int width, int height, std::string x_label, std::string y_label)
    : w_(width), h_(height), xlabel_(std::move(x_label)), ylabel_(std::move(y_label)) {}

void SvgPlot::polyline(const std::vector<std::pair<double, double>>& pts,
                       const std::string& color, double stroke_width) {
  series_.push_back({Series::Line, pts, color, stroke_width});
}

void SvgPlot::polygon(const std::vector<std::pair<double, double>>& pts,
                      const std::string& color, double fill_opacity) {
  series_.push_back({Series::Fill, pts, color, fill_opacity});
}

void SvgPlot::markers(const std::vector<std::pair<double, double>>& pts,
                      const std::string& color, double radius) {
  series_.push_back({Series::Marks, pts, color, radius});
}

void SvgPlot::legend(const std::string& label, const std::string& color) {
  legend_.emplace_back(label, color);
}

std::string SvgPlot::render() const {
  const double ml = 70, mr = 20, mt = 20, mb = 50;
  const double pw = w_ - ml - mr, ph = h_ - mt - mb;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series_) {
    for (auto [x, y] : s.pts) {
      if (log_x && !(x > 0)) continue;
      if (log_y && !(y > 0)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmin < xmax)) {
    xmin = log_x ? 0.1 : 0.0;
    xmax = 1.0;
  }
  if (!(ymin < ymax)) {
    ymin = log_y ? 0.1 : 0.0;
    ymax = std::max(1.0, ymin * 10);
  }

  auto tx = [&](double x) {
    const double u = log_x ? (std::log10(x) - std::log10(xmin)) /
                                 (std::log10(xmax) - std::log10(xmin))
                           : (x - xmin) / (xmax - xmin);
    return ml + u * pw;
  };
  auto ty = [&](double y) {
    const double u = log_y ? (std::log10(y) - std::log10(ymin)) /
                                 (std::log10(ymax) - std::log10(ymin))
                           : (y - ymin) / (ymax - ymin);
    return mt + (1.0 - u) * ph;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\""
      << h_ << "\" viewBox=\"0 0 " << w_ << ' ' << h_ << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // axes box
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\""
      << ph << "\" fill=\"none\" stroke=\"black\"/>\n";

  auto ticks = [&](double lo, double hi, bool logscale) {
    std::vector<double> t;
    if (logscale) {
      const int e0 = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
      const int e1 = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
      for (int e = e0; e <= e1; ++e) t.push_back(std::pow(10.0, e));
      if (t.empty()) t = {lo, hi};
    } else {
      for (int i = 0; i <= 5; ++i) t.push_back(lo + (hi - lo) * i / 5.0);
    }
    return t;
  };

  char buf[64];
  for (double x : ticks(xmin, xmax, log_x)) {
    const double px = tx(x);
    out << "<line x1=\"" << px << "\" y1=\"" << mt + ph << "\" x2=\"" << px << "\" y2=\""
        << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    out << "<text x=\"" << px << "\" y=\"" << mt + ph + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << buf << "</text>\n";
  }
  for (double y : ticks(ymin, ymax, log_y)) {
    const double py = ty(y);
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\""
        << py << "\" stroke=\"black\"/>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", y);
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << buf << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h_ - 10
      << "\" font-size=\"13\" text-anchor=\"middle\">" << xlabel_ << "</text>\n";
  out << "<text x=\"15\" y=\"" << mt + ph / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << mt + ph / 2 << ")\">" << ylabel_ << "</text>\n";

  auto emit_points = [&](const Series& s) {
    std::ostringstream pts;
    for (auto [x, y] : s.pts) {
      const double cx = log_x ? std::max(x, xmin) : x;
      const double cy = log_y ? std::max(y, ymin) : y;
      pts << tx(cx) << ',' << ty(cy) << ' ';
    }
    return pts.str();
  };

  for (const auto& s : series_) {
    if (s.pts.empty()) continue;
    switch (s.kind) {
      case Series::Fill:
        out << "<polygon points=\"" << emit_points(s) << "\" fill=\"" << s.color
            << "\" fill-opacity=\"" << s.param << "\" stroke=\"none\"/>\n";
        break;
      case Series::Line:
        out << "<polyline points=\"" << emit_points(s) << "\" fill=\"none\" stroke=\""
            << s.color << "\" stroke-width=\"" << s.param << "\"/>\n";
        break;
      case Series::Marks:
        for (auto [x, y] : s.pts) {
          if ((log_x && !(x > 0)) || (log_y && !(y > 0))) continue;
          out << "<circle cx=\"" << tx(x) << "\" cy=\"" << ty(y) << "\" r=\"" << s.param
              << "\" fill=\"" << s.color << "\"/>\n";
        }
        break;
    }
  }

  double ly = mt + 14;
  for (const auto& [label, color] : legend_) {
    out << "<rect x=\"" << ml + pw - 150 << "\" y=\"" << ly - 9
        << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << ml + pw - 132 << "\" y=\"" << ly + 2
        << "\" font-size=\"12\">" << label << "</text>\n";
    ly += 18;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace spsa
