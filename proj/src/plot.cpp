#include "pcmor/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace pcmor {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

} // namespace

void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series,
                    const PlotOptions& opts) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_svg_plot: cannot open " + path);

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      double y = s.y[i];
      if (opts.logy) {
        if (!(y > 0.0)) continue;
        y = std::log10(y);
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmax > xmin)) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (!(ymax > ymin)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double xpad = 0.02 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;

  const int W = opts.width, H = opts.height;
  const int ml = 70, mr = 20, mt = 40, mb = 50;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\" "
      << "font-family=\"sans-serif\">" << opts.title << "</text>\n";

  // frame and ticks
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
      << "\" height=\"" << H - mt - mb << "\" fill=\"none\" stroke=\"#333\"/>\n";
  const int nticks = 6;
  for (int i = 0; i <= nticks; ++i) {
    const double xv = xmin + (xmax - xmin) * i / nticks;
    const double yv = ymin + (ymax - ymin) * i / nticks;
    out << "<line x1=\"" << px(xv) << "\" y1=\"" << H - mb << "\" x2=\"" << px(xv) << "\" y2=\""
        << H - mb + 4 << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18
        << "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">" << fmt(xv)
        << "</text>\n";
    out << "<line x1=\"" << ml - 4 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml << "\" y2=\""
        << py(yv) << "\" stroke=\"#333\"/>\n";
    const std::string ylab = opts.logy ? ("1e" + fmt(yv)) : fmt(yv);
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 3
        << "\" text-anchor=\"end\" font-size=\"10\" font-family=\"sans-serif\">" << ylab
        << "</text>\n";
  }
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << opts.xlabel
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << H / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
      << "transform=\"rotate(-90 16 " << H / 2 << ")\">" << opts.ylabel << "</text>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % (sizeof(kColors) / sizeof(kColors[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < series[s].x.size(); ++i) {
      double y = series[s].y[i];
      if (opts.logy) {
        if (!(y > 0.0)) continue;
        y = std::log10(y);
      }
      out << px(series[s].x[i]) << "," << py(y) << " ";
    }
    out << "\"/>\n";
    if (!series[s].label.empty()) {
      const int ly = mt + 16 + static_cast<int>(s) * 16;
      out << "<line x1=\"" << W - mr - 100 << "\" y1=\"" << ly << "\" x2=\"" << W - mr - 80
          << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << W - mr - 74 << "\" y=\"" << ly + 4
          << "\" font-size=\"11\" font-family=\"sans-serif\">" << series[s].label << "</text>\n";
    }
  }
  out << "</svg>\n";
}

} // namespace pcmor
