#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ledtree/tree.hpp"

namespace ledtree {

struct RenderSpec {
  int width = 800;
  int height = 600;
  double margin = 40.0;
  double edge_stroke = 2.0;
  double leaf_radius = 4.0;
  double inner_radius = 3.0;
  double root_size = 10.0;  // side of the root marker square
  double font_size = 12.0;
  bool annotate_years = false;
  bool projected = false;        // adds a note that drawn lengths are projections
  std::vector<double> years;     // per vertex, used when annotate_years is set
};

/// Renders a planar tree (or a projected one; projection is the caller's
/// job) as SVG: leaves and inner vertices as dots, the root as a square,
/// edges as line segments, optional per-vertex year annotations.
/// Throws DimensionUnsupported unless the instance is two-dimensional.
std::string render_svg(const LedTreeInstance& instance,
                       const std::vector<std::string>& leaf_labels,
                       const RenderSpec& spec = {});

/// Principal-axes projection of all vertex positions onto the plane spanned
/// by the two dominant axes of the leaf cloud. Returns a planar instance
/// over the projected hanging type.
LedTreeInstance project_to_plane(const LedTreeInstance& instance);

}  // namespace ledtree
