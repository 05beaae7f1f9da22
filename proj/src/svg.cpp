#include "ecodec/svg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ecodec/util.hpp"

namespace ecodec {

void write_sweep_svg(const std::vector<SweepPoint>& points, std::ostream& out) {
  const double width = 640, height = 480, margin = 60;

  struct Dot {
    double acc, ppl;
    DecodeMode mode;
  };
  std::vector<Dot> dots;
  for (const auto& p : points) {
    double acc = 0.0;
    for (const auto& [attr, a] : p.accuracy) acc += a;
    if (!p.accuracy.empty()) acc /= static_cast<double>(p.accuracy.size());
    dots.push_back({acc, p.perplexity, p.mode});
  }

  double ppl_min = dots.empty() ? 0.0 : dots[0].ppl, ppl_max = ppl_min;
  for (const auto& d : dots) {
    ppl_min = std::min(ppl_min, d.ppl);
    ppl_max = std::max(ppl_max, d.ppl);
  }
  if (ppl_max <= ppl_min) ppl_max = ppl_min + 1.0;

  auto sx = [&](double acc) { return margin + acc * (width - 2 * margin); };
  auto sy = [&](double ppl) {
    return height - margin - (ppl - ppl_min) / (ppl_max - ppl_min) * (height - 2 * margin);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
      << width - margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\" font-size=\"14\">accuracy</text>\n";
  out << "<text x=\"18\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"14\""
      << " transform=\"rotate(-90 18 " << height / 2 << ")\">perplexity</text>\n";
  out << "<text x=\"" << margin << "\" y=\"" << height - margin + 20
      << "\" font-size=\"12\">0</text>\n";
  out << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 20
      << "\" text-anchor=\"end\" font-size=\"12\">1</text>\n";
  out << "<text x=\"" << margin - 6 << "\" y=\"" << height - margin
      << "\" text-anchor=\"end\" font-size=\"12\">" << fmt_double(ppl_min) << "</text>\n";
  out << "<text x=\"" << margin - 6 << "\" y=\"" << margin
      << "\" text-anchor=\"end\" font-size=\"12\">" << fmt_double(ppl_max) << "</text>\n";

  auto color = [](DecodeMode mode) {
    return mode == DecodeMode::eco ? "#2ca02c" : "#d62728";
  };
  for (const auto& d : dots)
    out << "<circle cx=\"" << sx(d.acc) << "\" cy=\"" << sy(d.ppl)
        << "\" r=\"4\" fill=\"" << color(d.mode) << "\"/>\n";

  out << "<circle cx=\"" << width - margin - 120 << "\" cy=\"" << margin
      << "\" r=\"4\" fill=\"#d62728\"/>\n";
  out << "<text x=\"" << width - margin - 110 << "\" y=\"" << margin + 4
      << "\" font-size=\"12\">static</text>\n";
  out << "<circle cx=\"" << width - margin - 120 << "\" cy=\"" << margin + 18
      << "\" r=\"4\" fill=\"#2ca02c\"/>\n";
  out << "<text x=\"" << width - margin - 110 << "\" y=\"" << margin + 22
      << "\" font-size=\"12\">eco</text>\n";
  out << "</svg>\n";
}

}  // namespace ecodec
