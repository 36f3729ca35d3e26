#ifndef PCMOR_PLOT_HPP
#define PCMOR_PLOT_HPP

#include <string>
#include <vector>

namespace pcmor {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logy = false;
  int width = 720;
  int height = 480;
};

/// Minimal static renderer: polyline chart written as a self-contained SVG
/// file. The CSV outputs remain the authoritative artifacts.
void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series,
                    const PlotOptions& opts);

} // namespace pcmor

#endif
