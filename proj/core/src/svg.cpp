#include "ledtree/svg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cstdio>
#include <sstream>

namespace ledtree {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const LedTreeInstance& inst, const std::vector<std::string>& leaf_labels,
                       const RenderSpec& spec) {
  if (inst.dim() != 2)
    throw Error(ErrorCode::DimensionUnsupported,
                "SVG rendering needs a planar instance; project first");
  const TreeTopology& t = inst.topology();

  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
  for (int v = 0; v < t.vertex_count(); ++v) {
    min_x = std::min(min_x, inst.position(v)[0]);
    max_x = std::max(max_x, inst.position(v)[0]);
    min_y = std::min(min_y, inst.position(v)[1]);
    max_y = std::max(max_y, inst.position(v)[1]);
  }
  const double span_x = std::max(max_x - min_x, 1e-12);
  const double span_y = std::max(max_y - min_y, 1e-12);
  const double scale = std::min((spec.width - 2.0 * spec.margin) / span_x,
                                (spec.height - 2.0 * spec.margin) / span_y);
  const double off_x = 0.5 * (spec.width - scale * (min_x + max_x));
  const double off_y = 0.5 * (spec.height + scale * (min_y + max_y));

  auto px = [&](const Point& p) { return off_x + scale * p[0]; };
  auto py = [&](const Point& p) { return off_y - scale * p[1]; };  // y grows upward

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (const auto& e : t.edges) {
    const Point& a = inst.position(e.parent);
    const Point& b = inst.position(e.child);
    svg << "  <line x1=\"" << fmt(px(a)) << "\" y1=\"" << fmt(py(a)) << "\" x2=\"" << fmt(px(b))
        << "\" y2=\"" << fmt(py(b)) << "\" stroke=\"black\" stroke-width=\""
        << fmt(spec.edge_stroke) << "\"/>\n";
  }

  for (int v = 0; v < t.vertex_count(); ++v) {
    const Point& p = inst.position(v);
    if (v == t.root) {
      const double h = spec.root_size / 2.0;
      svg << "  <rect x=\"" << fmt(px(p) - h) << "\" y=\"" << fmt(py(p) - h) << "\" width=\""
          << fmt(spec.root_size) << "\" height=\"" << fmt(spec.root_size)
          << "\" fill=\"black\"/>\n";
    } else if (t.is_leaf(v)) {
      svg << "  <circle cx=\"" << fmt(px(p)) << "\" cy=\"" << fmt(py(p)) << "\" r=\""
          << fmt(spec.leaf_radius) << "\" fill=\"black\"/>\n";
      const size_t off = static_cast<size_t>(v - t.inner_count());
      const std::string label = off < leaf_labels.size() ? leaf_labels[off] : "";
      if (!label.empty())
        svg << "  <text x=\"" << fmt(px(p) + 6.0) << "\" y=\"" << fmt(py(p) - 6.0)
            << "\" font-size=\"" << fmt(spec.font_size) << "\" font-family=\"sans-serif\">"
            << xml_escape(label) << "</text>\n";
    } else {
      svg << "  <circle cx=\"" << fmt(px(p)) << "\" cy=\"" << fmt(py(p)) << "\" r=\""
          << fmt(spec.inner_radius) << "\" fill=\"black\"/>\n";
    }
    if (spec.annotate_years && static_cast<size_t>(v) < spec.years.size() && !t.is_leaf(v)) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%.0f", spec.years[static_cast<size_t>(v)]);
      svg << "  <text x=\"" << fmt(px(p) + 6.0) << "\" y=\"" << fmt(py(p) + 14.0)
          << "\" font-size=\"" << fmt(spec.font_size)
          << "\" font-family=\"sans-serif\" fill=\"dimgray\">" << buf << "</text>\n";
    }
  }

  if (spec.projected)
    svg << "  <text x=\"" << fmt(spec.margin) << "\" y=\"" << fmt(spec.height - 10.0)
        << "\" font-size=\"" << fmt(spec.font_size)
        << "\" font-family=\"sans-serif\" fill=\"dimgray\">principal-axes projection; drawn "
           "lengths are projections, not edge lengths</text>\n";

  svg << "</svg>\n";
  return svg.str();
}

LedTreeInstance project_to_plane(const LedTreeInstance& inst) {
  const HangingType& ht = inst.hanging_type();
  if (ht.dim == 2) return inst;
  if (ht.dim == 1) {
    // lift a line tree into the plane
    HangingType flat;
    flat.topology = ht.topology;
    flat.dim = 2;
    auto lift = [](const Point& p) {
      Point q(2);
      q << p[0], 0.0;
      return q;
    };
    for (const auto& p : ht.leaf_coords) flat.leaf_coords.push_back(lift(p));
    Placement placement;
    for (const auto& p : inst.placement().inner) placement.inner.push_back(lift(p));
    return evaluate(flat, placement);
  }

  const int nl = ht.topology.leaf_count;
  Point mean = Point::Zero(ht.dim);
  for (const auto& p : ht.leaf_coords) mean += p;
  mean /= nl;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(ht.dim, ht.dim);
  for (const auto& p : ht.leaf_coords) {
    const Point d = p - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  Eigen::MatrixXd axes(2, ht.dim);
  axes.row(0) = eig.eigenvectors().col(ht.dim - 1).transpose();
  axes.row(1) = eig.eigenvectors().col(ht.dim - 2).transpose();

  HangingType flat;
  flat.topology = ht.topology;
  flat.dim = 2;
  flat.leaf_coords.reserve(ht.leaf_coords.size());
  for (const auto& p : ht.leaf_coords) flat.leaf_coords.push_back(axes * (p - mean));
  Placement placement;
  placement.inner.reserve(inst.placement().inner.size());
  for (const auto& p : inst.placement().inner) placement.inner.push_back(axes * (p - mean));
  return evaluate(flat, placement);
}

}  // namespace ledtree
