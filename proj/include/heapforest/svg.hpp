#pragma once

#include <string>

#include "heapforest/hammersley.hpp"

namespace heapforest {

struct RenderOptions {
  double width = 800.0;
  double height = 600.0;
  // Alternate two colors over the trees, in root creation order.
  bool color_trees = false;
  // Print each atom's initial lives under its cross.
  bool show_lives = true;
};

// Space-time diagram of a record as SVG: crosses at atoms, solid vertical
// segments while a particle is alive with a dotted tail after its death,
// horizontal attachment lines (roots reach the left boundary, sink lines
// the right one) and the two axes. Pure function of (record, options):
// rendering twice gives identical bytes.
std::string render_svg(const GraphicalRecord& record,
                       const RenderOptions& options = {});

}  // namespace heapforest
