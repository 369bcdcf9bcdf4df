#include "courtphase/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace courtphase {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string open_svg(double width, double height) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + ' ' + num(height) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\">" + s +
         "</text>\n";
}

}  // namespace

std::string render_mds_svg(const MdsEmbedding& embedding, std::span<const PlayerId> players,
                           ClusterId cluster, double extent) {
  constexpr double size = 320.0;
  constexpr double margin = 30.0;
  const double half = extent > 0.0 ? extent : 1.0;
  const double scale = (size - 2 * margin) / (2 * half);
  auto px = [&](double v) { return margin + (v + half) * scale; };
  auto py = [&](double v) { return size - margin - (v + half) * scale; };

  std::string svg = open_svg(size, size);
  svg += text(size / 2, 18, "C" + std::to_string(cluster + 1) + " MDS map");
  svg += "<line x1=\"" + num(px(-half)) + "\" y1=\"" + num(py(0)) + "\" x2=\"" + num(px(half)) +
         "\" y2=\"" + num(py(0)) + "\" stroke=\"#bbb\"/>\n";
  svg += "<line x1=\"" + num(px(0)) + "\" y1=\"" + num(py(-half)) + "\" x2=\"" + num(px(0)) +
         "\" y2=\"" + num(py(half)) + "\" stroke=\"#bbb\"/>\n";
  const std::size_t dim = embedding.dim;
  for (std::size_t i = 0; i < embedding.points; ++i) {
    const double x = embedding.coordinates[i * dim];
    const double y = dim > 1 ? embedding.coordinates[i * dim + 1] : 0.0;
    svg += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) +
           "\" r=\"5\" fill=\"#1f77b4\"/>\n";
    const std::string label = i < players.size() ? std::to_string(players[i]) : std::to_string(i);
    svg += text(px(x) + 8, py(y) - 6, label, "start");
  }
  svg += "</svg>\n";
  return svg;
}

std::string render_profile_svg(const std::vector<double>& deviations,
                               std::span<const PlayerPair> pairs, ClusterId cluster, double extent) {
  constexpr double bar = 28.0;
  constexpr double margin = 40.0;
  constexpr double height = 260.0;
  const double width = 2 * margin + bar * static_cast<double>(deviations.size());
  const double half = extent > 0.0 ? extent : 1.0;
  const double mid = height / 2;
  const double scale = (height / 2 - margin) / half;

  std::string svg = open_svg(width, height);
  svg += text(width / 2, 18, "C" + std::to_string(cluster + 1) + " distance profile (m vs. match mean)");
  svg += "<line x1=\"" + num(margin) + "\" y1=\"" + num(mid) + "\" x2=\"" + num(width - margin) +
         "\" y2=\"" + num(mid) + "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < deviations.size(); ++i) {
    const double v = deviations[i];
    const double h = std::abs(v) * scale;
    const double x = margin + bar * static_cast<double>(i) + 4;
    const double y = v >= 0 ? mid - h : mid;
    svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(bar - 8) +
           "\" height=\"" + num(h) + "\" fill=\"" + (v < 0 ? "#d62728" : "#2ca02c") + "\"/>\n";
    if (i < pairs.size()) {
      svg += text(x + (bar - 8) / 2, height - 10,
                  std::to_string(pairs[i].first) + "-" + std::to_string(pairs[i].second));
    }
  }
  svg += "</svg>\n";
  return svg;
}

std::string render_transition_svg(const TransitionMatrix& tm) {
  constexpr double cell = 44.0;
  constexpr double margin = 40.0;
  const double size = 2 * margin + cell * static_cast<double>(tm.k);
  std::string svg = open_svg(size, size);
  svg += text(size / 2, 18, "Switch probabilities (row = from, column = to)");
  for (std::size_t a = 0; a < tm.k; ++a) {
    svg += text(margin - 14, margin + cell * (static_cast<double>(a) + 0.6), "C" + std::to_string(a + 1));
    svg += text(margin + cell * (static_cast<double>(a) + 0.5), margin - 6, "C" + std::to_string(a + 1));
    for (std::size_t b = 0; b < tm.k; ++b) {
      const double p = tm.probability(a, b);
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - std::clamp(p, 0.0, 1.0))));
      const double x = margin + cell * static_cast<double>(b);
      const double y = margin + cell * static_cast<double>(a);
      svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell) + "\" height=\"" +
             num(cell) + "\" fill=\"rgb(" + std::to_string(shade) + "," + std::to_string(shade) +
             ",255)\" stroke=\"#ccc\"/>\n";
      svg += text(x + cell / 2, y + cell / 2 + 4, std::to_string(tm.count(a, b)));
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace courtphase
