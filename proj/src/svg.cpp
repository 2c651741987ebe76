#include "heapforest/svg.hpp"

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace heapforest {

namespace {

std::string px(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void line(std::string& out, double x1, double y1, double x2, double y2,
          const std::string& style) {
  out += "  <line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" +
         px(x2) + "\" y2=\"" + px(y2) + "\" " + style + "/>\n";
}

void text(std::string& out, double x, double y, const std::string& anchor,
          const std::string& fill, const std::string& content) {
  out += "  <text x=\"" + px(x) + "\" y=\"" + px(y) + "\" text-anchor=\"" +
         anchor + "\" font-family=\"monospace\" font-size=\"10\" fill=\"" +
         fill + "\">" + content + "</text>\n";
}

}  // namespace

std::string render_svg(const GraphicalRecord& record,
                       const RenderOptions& options) {
  if (!(record.t_max > 0.0) || !(record.x_hi > record.x_lo))
    throw std::invalid_argument("render_svg: degenerate record box");
  if (!(options.width >= 100.0) || !(options.height >= 100.0))
    throw std::invalid_argument("render_svg: canvas too small");

  const double ml = 60.0, mr = 20.0, mt = 20.0, mb = 45.0;
  const double pw = options.width - ml - mr;
  const double ph = options.height - mt - mb;
  const auto X = [&](double x) {
    return ml + (x - record.x_lo) / (record.x_hi - record.x_lo) * pw;
  };
  const auto Y = [&](double t) {
    return mt + (record.t_max - t) / record.t_max * ph;
  };

  // Tree index of each vertex: root rank, alternating palette. A vertex's
  // parent always has a smaller id, so one forward pass suffices.
  std::vector<uint32_t> tree(record.vertices.size(), 0);
  {
    uint32_t rank = 0;
    for (std::size_t i = 0; i < record.vertices.size(); ++i)
      tree[i] = record.vertices[i].parent == kNoVertex
                    ? rank++
                    : tree[record.vertices[i].parent];
  }
  const auto color_of = [&](uint32_t vertex) -> std::string {
    if (!options.color_trees || vertex == kNoVertex) return "#000000";
    return tree[vertex] % 2 == 0 ? "#c0392b" : "#27ae60";
  };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       px(options.width) + "\" height=\"" + px(options.height) +
       "\" viewBox=\"0 0 " + px(options.width) + " " + px(options.height) +
       "\">\n";
  s += "  <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  // Axes: left boundary (labels) and bottom edge (time zero).
  const std::string axis = "stroke=\"#333333\" stroke-width=\"1.5\"";
  line(s, ml, mt, ml, mt + ph, axis);
  line(s, ml, mt + ph, ml + pw, mt + ph, axis);
  text(s, ml, mt + ph + 16.0, "middle", "#333333", num(record.x_lo));
  text(s, ml + pw, mt + ph + 16.0, "middle", "#333333", num(record.x_hi));
  text(s, ml - 8.0, mt + ph + 4.0, "end", "#333333", "0");
  text(s, ml - 8.0, mt + 4.0, "end", "#333333", num(record.t_max));

  // Sink lines first so genealogy draws over them.
  for (const HorizontalSegment& h : record.horizontal_segments)
    if (h.child == kNoVertex)
      line(s, X(h.x_from), Y(h.time), X(h.x_to), Y(h.time),
           "stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"2 3\"");

  for (const HorizontalSegment& h : record.horizontal_segments)
    if (h.child != kNoVertex)
      line(s, X(h.x_from), Y(h.time), X(h.x_to), Y(h.time),
           "stroke=\"" + color_of(h.child) + "\" stroke-width=\"1.2\"");

  for (const VerticalSegment& v : record.vertical_segments) {
    line(s, X(v.label), Y(v.t_birth), X(v.label), Y(v.t_end),
         "stroke=\"" + color_of(v.vertex) + "\" stroke-width=\"1.2\"");
    if (v.dies && v.t_end < record.t_max)
      line(s, X(v.label), Y(v.t_end), X(v.label), Y(record.t_max),
           "stroke=\"" + color_of(v.vertex) +
               "\" stroke-width=\"1.2\" stroke-dasharray=\"4 3\"");
  }

  // Crosses at atoms; sources sit before atoms in the vertex list.
  const std::size_t first_atom =
      record.vertices.size() - record.atoms.size();
  for (std::size_t i = 0; i < record.atoms.size(); ++i) {
    const Atom& a = record.atoms[i];
    const uint32_t vertex = static_cast<uint32_t>(first_atom + i);
    const double cx = X(a.label), cy = Y(a.time);
    const std::string stroke =
        options.color_trees ? color_of(vertex) : "#2a7d2a";
    line(s, cx - 4.0, cy - 4.0, cx + 4.0, cy + 4.0,
         "stroke=\"" + stroke + "\" stroke-width=\"1.6\"");
    line(s, cx - 4.0, cy + 4.0, cx + 4.0, cy - 4.0,
         "stroke=\"" + stroke + "\" stroke-width=\"1.6\"");
    if (options.show_lives)
      text(s, cx, cy + 14.0, "middle", stroke, std::to_string(a.lives));
  }

  s += "</svg>\n";
  return s;
}

}  // namespace heapforest
