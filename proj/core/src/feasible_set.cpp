#include "ledtree/feasible_set.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace ledtree {

namespace {
constexpr double kDirTol = 1e-12;
}

double HyperboloidSheet::equation_defect(const Point& p) const {
  return (p - focus1).norm() - (p - focus2).norm() - (height2 - height1);
}

bool HyperboloidSheet::contains(const Point& p, double tol) const {
  return std::abs(equation_defect(p)) <= tol;
}

Point HyperboloidSheet::half_line_direction() const {
  // Starts at the focus of greater height, pointing away from the other one.
  const Point d = height1 >= height2 ? (focus1 - focus2) : (focus2 - focus1);
  return d / d.norm();
}

Point HyperboloidSheet::point_at_offset(double rho, const Point& transverse) const {
  if (collapsed) {
    const Point start = height1 >= height2 ? focus1 : focus2;
    return start + std::abs(rho) * half_line_direction();
  }
  const double a = signed_semi_major;
  double axial = 0.0;
  if (a != 0.0)
    axial = a * std::sqrt(1.0 + (rho * rho) / (semi_minor * semi_minor));
  return center + axial * axis + rho * transverse;
}

bool sibling_existence_check(const Point& v1, const Point& v2, double h1, double h2) {
  return (v1 - v2).norm() >= std::abs(h2 - h1);
}

HyperboloidSheet hyperboloid_sheet(const Point& v1, const Point& v2, double h1, double h2) {
  const double focal = (v1 - v2).norm();
  if (focal == 0.0)
    throw Error(ErrorCode::DegenerateFoci,
                "coincident siblings: every parent position is admissible");
  if (focal < std::abs(h2 - h1))
    throw Error(ErrorCode::InfeasiblePair, "no parent position satisfies the depth condition");

  HyperboloidSheet s;
  s.focus1 = v1;
  s.focus2 = v2;
  s.height1 = h1;
  s.height2 = h2;
  s.signed_semi_major = 0.5 * (h1 - h2);
  s.linear_eccentricity = 0.5 * focal;
  s.center = 0.5 * (v1 + v2);
  s.axis = (v1 - v2) / focal;
  const double b2 = s.linear_eccentricity * s.linear_eccentricity -
                    s.signed_semi_major * s.signed_semi_major;
  s.semi_minor = b2 > 0.0 ? std::sqrt(b2) : 0.0;
  s.collapsed = b2 <= 0.0 && s.signed_semi_major != 0.0;
  return s;
}

Point root_on_segment(const Point& child1, const Point& child2, double h1, double h2) {
  const Point diff = child2 - child1;
  const double d = diff.norm();
  if (d == 0.0)
    throw Error(ErrorCode::CoincidentChildren, "children coincide; segment point undefined");
  if (d < std::abs(h2 - h1))
    throw Error(ErrorCode::InfeasiblePair,
                "children too close for their height difference");
  const double t = (d + h2 - h1) / (2.0 * d);
  return child1 + t * diff;
}

RegularityReport classify_regularity(const LedTreeInstance& inst, double tol) {
  if (tol < 0.0) tol = inst.feasibility_tolerance();
  if (led_residuals(inst).cwiseAbs().maxCoeff() > inst.feasibility_tolerance())
    throw Error(ErrorCode::NotFeasible,
                "regularity is defined on the feasible set; residuals too large");

  const TreeTopology& t = inst.topology();
  RegularityReport report;
  for (int j = 0; j < t.edge_count(); ++j)
    if (inst.edge_length(j) <= tol)
      report.violations.push_back({RegularityViolationKind::ZeroLengthEdge, j});

  for (int i = 0; i < t.inner_count(); ++i) {
    const int el = t.edge_to_parent(t.left_child(i));
    const int er = t.edge_to_parent(t.right_child(i));
    if (inst.edge_length(el) <= tol || inst.edge_length(er) <= tol) continue;
    if ((inst.u_left(i) - inst.u_right(i)).norm() <= tol)
      report.violations.push_back({RegularityViolationKind::CoincidentLeafDirections, i});
  }
  report.regular = report.violations.empty();
  return report;
}

double propagate_speed(double q_prev, const Point& alpha_prev, const Point& u_prev_minus,
                       const Point& u_prev_up, const Point& alpha_cur,
                       const Point& u_cur_minus, const Point& u_cur_plus) {
  const double denom = alpha_cur.dot(u_cur_minus - u_cur_plus);
  if (std::abs(denom) < kDirTol)
    throw Error(ErrorCode::TangentDirectionForbidden,
                "requested direction is tangent to the local sheet");
  const double numer = q_prev * alpha_prev.dot(u_prev_minus + u_prev_up);
  return numer / denom;
}

Eigen::VectorXd TangentDirection::flat(int inner_count, int dim) const {
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inner_count) * dim);
  for (size_t k = 0; k < path.size(); ++k)
    tau.segment(static_cast<Eigen::Index>(path[k]) * dim, dim) = velocities[k];
  return tau;
}

namespace {

int off_path_child(const TreeTopology& t, int vertex, int path_child) {
  return t.left_child(vertex) == path_child ? t.right_child(vertex) : t.left_child(vertex);
}

}  // namespace

TangentDirection height_preserving_direction(const LedTreeInstance& inst, int seed,
                                             const Point& w) {
  const TreeTopology& t = inst.topology();
  if (seed < 0 || seed >= t.inner_count())
    throw Error(ErrorCode::IndexRangeViolation, "seed must be an inner vertex", seed);
  {
    RegularityReport reg = classify_regularity(inst);
    if (!reg.regular)
      throw Error(ErrorCode::NotRegular, "tangent construction requires a regular point");
  }
  const double wnorm = w.norm();
  if (wnorm < kDirTol)
    throw Error(ErrorCode::TangentDirectionForbidden, "zero seed velocity");
  // The seed must move within its own sheet: orthogonal to the sheet normal,
  // which is the difference of the child edge directions.
  const Point normal_seed = inst.u_left(seed) - inst.u_right(seed);
  if (std::abs(w.dot(normal_seed)) > 1e-8 * wnorm)
    throw Error(ErrorCode::TangentDirectionForbidden,
                "seed velocity is not tangent to the seed's sheet");

  TangentDirection dir;
  dir.seed_vertex = seed;
  dir.seed_velocity = w;
  dir.path.push_back(seed);
  dir.velocities.push_back(w);

  int prev = seed;
  Point vel_prev = w;
  // For the seed both child edges are off the path; by tangency either one
  // gives the same leaf-path rate, we use the right child edge.
  Point u_minus_prev = inst.u_right(seed);

  int cur = t.parent[static_cast<size_t>(prev)];
  while (cur != -1) {
    const int other = off_path_child(t, cur, prev);
    const Point u_plus = (inst.position(cur) - inst.position(prev)).normalized();
    const Point u_minus = (inst.position(cur) - inst.position(other)).normalized();
    const Point u_up_prev = -u_plus;  // unit from the parent toward prev

    const double q_prev = vel_prev.norm();
    const Point alpha_prev = q_prev > 0.0 ? Point(vel_prev / q_prev) : vel_prev;

    Point velocity;
    if (cur != t.root) {
      if ((u_plus + u_minus).norm() <= 1e-9)
        throw Error(ErrorCode::AntiparallelBlock,
                    "antiparallel path edges at vertex " + std::to_string(cur), cur);
      // Height preservation: move orthogonally to the off-path child edge.
      const Point u_up = inst.u_parent(cur);
      Point alpha = u_up - u_up.dot(u_minus) * u_minus;
      const double an = alpha.norm();
      if (an < kDirTol)
        throw Error(ErrorCode::TangentDirectionForbidden,
                    "parent edge parallel to the off-path child edge at vertex " +
                        std::to_string(cur),
                    cur);
      alpha /= an;
      const double q =
          propagate_speed(q_prev, alpha_prev, u_minus_prev, u_up_prev, alpha, u_minus, u_plus);
      velocity = q * alpha;
    } else {
      const double hdot = vel_prev.dot(u_minus_prev);  // rate of height of prev
      if ((u_plus + u_minus).norm() <= 1e-6) {
        // Root on the segment joining its children: follow the moving
        // equal-depth segment point.
        const Point c1 = inst.position(prev);
        const Point c2 = inst.position(other);
        const Point dvec = c2 - c1;
        const double d = dvec.norm();
        const double delta = inst.height(other) - inst.height(prev);
        const double ddot = -vel_prev.dot(dvec / d);
        const double deltadot = -hdot;
        const double tpar = (d + delta) / (2.0 * d);
        const double tdot = (deltadot * d - delta * ddot) / (2.0 * d * d);
        velocity = (1.0 - tpar) * vel_prev + tdot * dvec;
      } else {
        Point alpha = u_minus - u_plus;
        const double an = alpha.norm();
        if (an < kDirTol)
          throw Error(ErrorCode::TangentDirectionForbidden,
                      "coincident child directions at the root");
        alpha /= an;
        const double q =
            propagate_speed(q_prev, alpha_prev, u_minus_prev, u_up_prev, alpha, u_minus, u_plus);
        velocity = q * alpha;
      }
    }

    dir.path.push_back(cur);
    dir.velocities.push_back(velocity);

    u_minus_prev = u_minus;
    vel_prev = velocity;
    prev = cur;
    cur = t.parent[static_cast<size_t>(cur)];
  }
  return dir;
}

// ---------------------------------------------------------------------------
// Pair-region probes
// ---------------------------------------------------------------------------

PairRegionExample parse_pair_region_example(const std::string& id) {
  if (id == "nested_collinear") return PairRegionExample::NestedCollinear;
  if (id == "shifted_collinear") return PairRegionExample::ShiftedCollinear;
  if (id == "cross") return PairRegionExample::Cross;
  throw Error(ErrorCode::UnknownExample, "unknown pair-region example '" + id + "'");
}

const char* to_string(PairRegionExample example) {
  switch (example) {
    case PairRegionExample::NestedCollinear: return "nested_collinear";
    case PairRegionExample::ShiftedCollinear: return "shifted_collinear";
    case PairRegionExample::Cross: return "cross";
  }
  return "?";
}

namespace {

void validate_params(PairRegionExample example, const PairRegionParams& p) {
  switch (example) {
    case PairRegionExample::NestedCollinear:
      if (!(p.c > 0.0 && p.c < p.a))
        throw Error(ErrorCode::ParameterViolation, "nested_collinear requires 0 < c < a");
      break;
    case PairRegionExample::ShiftedCollinear:
      if (!(p.c > 0.0 && p.c < p.a))
        throw Error(ErrorCode::ParameterViolation, "shifted_collinear requires 0 < d < a");
      break;
    case PairRegionExample::Cross:
      if (!(p.a > 0.0 && p.c > 0.0 && p.a != p.c))
        throw Error(ErrorCode::ParameterViolation, "cross requires a, c > 0 and a != c");
      break;
  }
}

}  // namespace

bool pair_region_membership(PairRegionExample example, const PairRegionParams& p, double s,
                            double t) {
  validate_params(example, p);
  switch (example) {
    case PairRegionExample::NestedCollinear:
      // X = (0, s) over A=(-a,0), B=(a,0); Y = (0, t) over C=(-c,0), D=(c,0).
      return std::abs(t - s) >=
             std::abs(std::sqrt(p.a * p.a + s * s) - std::sqrt(p.c * p.c + t * t));
    case PairRegionExample::ShiftedCollinear:
      // X = (-a, s) over A=(-a-d,0), B=(-a+d,0); Y = (a, t) likewise.
      return std::sqrt(4.0 * p.a * p.a + (t - s) * (t - s)) >=
             std::abs(std::sqrt(p.c * p.c + s * s) - std::sqrt(p.c * p.c + t * t));
    case PairRegionExample::Cross:
      // X = (0, s) over A=(-a,0), B=(a,0); Y = (t, 0) over C=(0,-c), D=(0,c).
      return std::sqrt(t * t + s * s) >=
             std::abs(std::sqrt(p.a * p.a + s * s) - std::sqrt(p.c * p.c + t * t));
  }
  return false;
}

double BoundaryCurve::evaluate(double s, double t) const {
  double value = 0.0;
  for (const auto& [monomial, coeff] : coefficients) {
    if (monomial == "s2") value += coeff * s * s;
    else if (monomial == "st") value += coeff * s * t;
    else if (monomial == "t2") value += coeff * t * t;
    else if (monomial == "s2t2") value += coeff * s * s * t * t;
    else if (monomial == "1") value += coeff;
  }
  return value;
}

BoundaryCurve pair_region_boundary(PairRegionExample example, const PairRegionParams& p) {
  validate_params(example, p);
  BoundaryCurve curve;
  const double a2 = p.a * p.a;
  const double c2 = p.c * p.c;
  switch (example) {
    case PairRegionExample::NestedCollinear:
      curve.kind = BoundaryCurve::Kind::Hyperbola;
      curve.coefficients = {{"s2", 4.0 * c2},
                            {"st", -4.0 * (a2 + c2)},
                            {"t2", 4.0 * a2},
                            {"1", -(a2 - c2) * (a2 - c2)}};
      break;
    case PairRegionExample::ShiftedCollinear:
      curve.kind = BoundaryCurve::Kind::WholePlane;
      break;
    case PairRegionExample::Cross:
      curve.kind = BoundaryCurve::Kind::QuarticOval;
      curve.coefficients = {{"s2t2", 1.0},
                            {"s2", c2},
                            {"t2", a2},
                            {"1", -(a2 - c2) * (a2 - c2) / 4.0}};
      break;
  }
  return curve;
}

std::vector<std::pair<double, double>> boundary_points(PairRegionExample example,
                                                       const PairRegionParams& p, int count,
                                                       double range) {
  validate_params(example, p);
  std::vector<std::pair<double, double>> pts;
  if (count <= 0) return pts;
  const double a2 = p.a * p.a;
  const double c2 = p.c * p.c;
  switch (example) {
    case PairRegionExample::NestedCollinear: {
      for (int k = 0; k < count; ++k) {
        const double s = -range + 2.0 * range * k / std::max(1, count - 1);
        const double disc = (a2 - c2) * std::sqrt(s * s + a2);
        const double base = (a2 + c2) * s;
        pts.emplace_back(s, (base + disc) / (2.0 * a2));
        pts.emplace_back(s, (base - disc) / (2.0 * a2));
      }
      break;
    }
    case PairRegionExample::ShiftedCollinear:
      break;  // boundary is empty: the whole plane is feasible
    case PairRegionExample::Cross: {
      const double smax = std::min(range, std::abs(a2 - c2) / (2.0 * p.c));
      for (int k = 0; k < count; ++k) {
        const double s = -smax + 2.0 * smax * k / std::max(1, count - 1);
        const double num = (a2 - c2) * (a2 - c2) / 4.0 - c2 * s * s;
        if (num < 0.0) continue;
        const double tt = std::sqrt(num / (s * s + a2));
        pts.emplace_back(s, tt);
        pts.emplace_back(s, -tt);
      }
      break;
    }
  }
  return pts;
}

GridProbeResult grid_probe(PairRegionExample example, const PairRegionParams& params, int size,
                           double range) {
  if (size < 2) throw Error(ErrorCode::ParameterViolation, "grid size must be at least 2");
  validate_params(example, params);

  GridProbeResult res;
  res.size = size;
  res.range = range;
  res.bitmap.assign(static_cast<size_t>(size) * static_cast<size_t>(size), 0);
  for (int row = 0; row < size; ++row) {
    const double t = -range + 2.0 * range * row / (size - 1);
    for (int col = 0; col < size; ++col) {
      const double s = -range + 2.0 * range * col / (size - 1);
      res.bitmap[static_cast<size_t>(row) * size + col] =
          pair_region_membership(example, params, s, t) ? 1 : 0;
    }
  }

  // 4-connected component labelling, separately for feasible cells and for
  // infeasible cells (holes are infeasible components away from the border).
  std::vector<int> label(res.bitmap.size(), -1);
  int n_components[2] = {0, 0};
  int holes = 0;
  for (int row = 0; row < size; ++row) {
    for (int col = 0; col < size; ++col) {
      const size_t idx = static_cast<size_t>(row) * size + col;
      if (label[idx] != -1) continue;
      const std::uint8_t value = res.bitmap[idx];
      const int comp = n_components[value]++;
      bool touches_border = false;
      std::deque<std::pair<int, int>> queue{{row, col}};
      label[idx] = comp;
      while (!queue.empty()) {
        auto [r, c] = queue.front();
        queue.pop_front();
        if (r == 0 || c == 0 || r == size - 1 || c == size - 1) touches_border = true;
        constexpr int dr[4] = {1, -1, 0, 0};
        constexpr int dc[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nr = r + dr[k];
          const int nc = c + dc[k];
          if (nr < 0 || nc < 0 || nr >= size || nc >= size) continue;
          const size_t nidx = static_cast<size_t>(nr) * size + nc;
          if (label[nidx] != -1 || res.bitmap[nidx] != value) continue;
          label[nidx] = comp;
          queue.emplace_back(nr, nc);
        }
      }
      if (value == 0 && !touches_border) ++holes;
    }
  }
  res.feasible_components = n_components[1];
  res.holes = holes;
  res.all_feasible = n_components[0] == 0;
  return res;
}

}  // namespace ledtree
