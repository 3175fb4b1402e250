#include "qpcm/svg_render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "qpcm/errors.hpp"

namespace qpcm {

namespace {

// Fixed formatting keeps the output byte-identical across runs.
std::string fmt(double v, int decimals = 2) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Rgb {
  int r, g, b;
};

// Diverging blue-white-red scale, interpolated over five stops.
Rgb palette(double t) {
  static const Rgb stops[] = {
      {33, 102, 172}, {103, 169, 207}, {247, 247, 247}, {239, 138, 98},
      {178, 24, 43}};
  t = std::clamp(t, 0.0, 1.0);
  const double x = t * 4.0;
  const int i = std::min(3, static_cast<int>(x));
  const double f = x - i;
  auto mix = [&](int a, int b) {
    return static_cast<int>(std::lround(a + f * (b - a)));
  };
  return {mix(stops[i].r, stops[i + 1].r), mix(stops[i].g, stops[i + 1].g),
          mix(stops[i].b, stops[i + 1].b)};
}

std::string color(const Rgb& c) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

}  // namespace

std::string render_wafer_map(std::span<const MapCell> cells,
                             const WaferGeometry& geometry,
                             const WaferMapStyle& style) {
  if (cells.empty()) fail(Errc::EmptyMap, "render_wafer_map: no sites");

  const double scale = 3.2;  // px per mm
  const double cx = 360.0, cy = 390.0;
  const double wafer_px = geometry.wafer_radius_mm * scale;
  const int width = 880, height = 780;

  double vmin = style.scale_min, vmax = style.scale_max;
  if (std::isnan(vmin) || std::isnan(vmax)) {
    vmin = cells.front().value;
    vmax = cells.front().value;
    for (const auto& c : cells) {
      vmin = std::min(vmin, c.value);
      vmax = std::max(vmax, c.value);
    }
  }
  const double vspan = vmax > vmin ? vmax - vmin : 1.0;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + fmt(cx) +
         "\" y=\"28\" font-family=\"sans-serif\" font-size=\"18\" "
         "text-anchor=\"middle\">" +
         style.title + "</text>\n";
  svg += "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"" +
         fmt(wafer_px) +
         "\" fill=\"#fbfbfb\" stroke=\"#555555\" stroke-width=\"1.5\"/>\n";

  const double w = geometry.pitch_x_mm * scale;
  const double h = geometry.pitch_y_mm * scale;
  for (const auto& c : cells) {
    std::string fill;
    if (style.mode == MapMode::PASS_FAIL) {
      fill = c.value > 0.5 ? "#2e9e4f" : "#d43f3f";
    } else {
      fill = color(palette((c.value - vmin) / vspan));
    }
    // SVG y grows downward; wafer y grows upward.
    const double x0 = cx + c.x_mm * scale - w / 2.0;
    const double y0 = cy - c.y_mm * scale - h / 2.0;
    svg += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" +
           fmt(w) + "\" height=\"" + fmt(h) + "\" fill=\"" + fill +
           "\" stroke=\"#888888\" stroke-width=\"0.5\"/>\n";
  }

  // Legend.
  const double lx = 760.0, ly0 = 140.0, lh = 480.0, lw = 26.0;
  if (style.mode == MapMode::PASS_FAIL) {
    svg += "<rect x=\"" + fmt(lx) + "\" y=\"" + fmt(ly0) +
           "\" width=\"18\" height=\"18\" fill=\"#2e9e4f\"/>\n";
    svg += "<text x=\"" + fmt(lx + 26) + "\" y=\"" + fmt(ly0 + 14) +
           "\" font-family=\"sans-serif\" font-size=\"14\">pass</text>\n";
    svg += "<rect x=\"" + fmt(lx) + "\" y=\"" + fmt(ly0 + 28) +
           "\" width=\"18\" height=\"18\" fill=\"#d43f3f\"/>\n";
    svg += "<text x=\"" + fmt(lx + 26) + "\" y=\"" + fmt(ly0 + 42) +
           "\" font-family=\"sans-serif\" font-size=\"14\">fail</text>\n";
  } else {
    const int steps = 64;
    for (int i = 0; i < steps; ++i) {
      const double t = (steps - 1 - i) / static_cast<double>(steps - 1);
      svg += "<rect x=\"" + fmt(lx) + "\" y=\"" +
             fmt(ly0 + i * lh / steps) + "\" width=\"" + fmt(lw) +
             "\" height=\"" + fmt(lh / steps + 0.5) + "\" fill=\"" +
             color(palette(t)) + "\"/>\n";
    }
    svg += "<text x=\"" + fmt(lx + lw + 8) + "\" y=\"" + fmt(ly0 + 12) +
           "\" font-family=\"sans-serif\" font-size=\"13\">" + fmt_g(vmax) +
           "</text>\n";
    svg += "<text x=\"" + fmt(lx + lw + 8) + "\" y=\"" + fmt(ly0 + lh) +
           "\" font-family=\"sans-serif\" font-size=\"13\">" + fmt_g(vmin) +
           "</text>\n";
    svg += "<text x=\"" + fmt(lx + lw / 2) + "\" y=\"" + fmt(ly0 - 14) +
           "\" font-family=\"sans-serif\" font-size=\"13\" "
           "text-anchor=\"middle\">" +
           style.legend_label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string render_histogram(const Histogram& hist,
                             const HistogramStyle& style) {
  if (hist.counts.empty() || hist.edges.size() != hist.counts.size() + 1)
    fail(Errc::EmptyMap, "render_histogram: empty or inconsistent histogram");

  const int width = 720, height = 480;
  const double x0 = 70.0, y0 = 410.0, plot_w = 600.0, plot_h = 330.0;

  std::int64_t peak = 1;
  std::int64_t total = 0;
  for (std::int64_t c : hist.counts) {
    peak = std::max(peak, c);
    total += c;
  }
  const double lo = hist.edges.front();
  const double hi = hist.edges.back();
  const double span = hi > lo ? hi - lo : 1.0;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + fmt(x0 + plot_w / 2) +
         "\" y=\"26\" font-family=\"sans-serif\" font-size=\"16\" "
         "text-anchor=\"middle\">" +
         style.title + "</text>\n";

  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const double bx = x0 + (hist.edges[i] - lo) / span * plot_w;
    const double bw = (hist.edges[i + 1] - hist.edges[i]) / span * plot_w;
    const double bh =
        plot_h * static_cast<double>(hist.counts[i]) / static_cast<double>(peak);
    svg += "<rect x=\"" + fmt(bx) + "\" y=\"" + fmt(y0 - bh) + "\" width=\"" +
           fmt(std::max(bw - 1.0, 0.5)) + "\" height=\"" + fmt(bh) +
           "\" fill=\"#4878a8\"/>\n";
  }

  if (style.gaussian && style.gaussian->sigma > 0.0) {
    // Scale the density so its peak matches the tallest bar.
    const double mu = style.gaussian->mu;
    const double sg = style.gaussian->sigma;
    std::string path = "M";
    for (int i = 0; i <= 120; ++i) {
      const double v = lo + span * i / 120.0;
      const double z = (v - mu) / sg;
      const double dens = std::exp(-0.5 * z * z);
      const double px = x0 + (v - lo) / span * plot_w;
      const double py = y0 - plot_h * dens;
      path += (i == 0 ? "" : " L") + fmt(px) + " " + fmt(py);
    }
    svg += "<path d=\"" + path +
           "\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\"/>\n";
  }

  svg += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" +
         fmt(x0 + plot_w) + "\" y2=\"" + fmt(y0) +
         "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" +
         fmt(x0) + "\" y2=\"" + fmt(y0 - plot_h) +
         "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + fmt(x0) + "\" y=\"" + fmt(y0 + 22) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + fmt_g(lo) +
         "</text>\n";
  svg += "<text x=\"" + fmt(x0 + plot_w) + "\" y=\"" + fmt(y0 + 22) +
         "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"end\">" +
         fmt_g(hi) + "</text>\n";
  svg += "<text x=\"" + fmt(x0 + plot_w / 2) + "\" y=\"" + fmt(y0 + 40) +
         "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\">" +
         style.x_label + "</text>\n";
  svg += "<text x=\"" + fmt(x0 - 8) + "\" y=\"" + fmt(y0 - plot_h + 4) +
         "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"end\">" +
         std::to_string(peak) + "</text>\n";
  svg += "<text x=\"" + fmt(x0 + plot_w) + "\" y=\"" + fmt(y0 - plot_h + 4) +
         "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"end\">n = " +
         std::to_string(total) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace qpcm
