#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ledtree/tree.hpp"

namespace ledtree {

/// One sheet of the two-sheet rotational hyperboloid of admissible parent
/// positions for a sibling pair: the locus of p with
///   ||p - focus1|| - ||p - focus2|| = height2 - height1.
/// The signed semi-major axis places the sheet vertex at center + a * axis.
/// When the focal distance equals |height2 - height1| the sheet collapses
/// to a half line starting at the focus of greater height.
struct HyperboloidSheet {
  double signed_semi_major = 0.0;    // a = (height1 - height2) / 2
  double linear_eccentricity = 0.0;  // half focal distance
  double semi_minor = 0.0;           // sqrt(ecc^2 - a^2)
  Point center;
  Point axis;  // unit vector from focus2 toward focus1
  Point focus1, focus2;
  double height1 = 0.0, height2 = 0.0;
  bool collapsed = false;

  Point vertex_point() const { return center + signed_semi_major * axis; }
  /// Signed violation of the defining equation at p.
  double equation_defect(const Point& p) const;
  bool contains(const Point& p, double tol) const;
  /// Point of the sheet at transverse offset rho along the unit direction
  /// `transverse` (orthogonal to the axis). On a collapsed sheet this walks
  /// |rho| along the half line instead.
  Point point_at_offset(double rho, const Point& transverse) const;
  /// Direction of the half line for a collapsed sheet.
  Point half_line_direction() const;
};

/// Whether a parent position exists for siblings at v1, v2 with subtree
/// heights h1, h2, i.e. ||v1 - v2|| >= |h2 - h1|.
bool sibling_existence_check(const Point& v1, const Point& v2, double h1, double h2);

/// Throws DegenerateFoci when v1 == v2 (every position is admissible, there
/// is no sheet) and InfeasiblePair when the existence inequality fails. The
/// collapsed half-line case is returned with the `collapsed` flag set.
HyperboloidSheet hyperboloid_sheet(const Point& v1, const Point& v2, double h1, double h2);

/// The unique point on the segment [child1, child2] satisfying the equal
/// depth condition: child1 + t (child2 - child1) with t = (d + h2 - h1)/(2d).
Point root_on_segment(const Point& child1, const Point& child2, double h1, double h2);

enum class RegularityViolationKind { ZeroLengthEdge, CoincidentLeafDirections };

struct RegularityViolation {
  RegularityViolationKind kind;
  int index;  // edge index or inner vertex index
};

struct RegularityReport {
  bool regular = false;
  std::vector<RegularityViolation> violations;
};

/// Classifies a feasible instance: regular iff every edge is longer than tol
/// and the left/right child directions differ by more than tol at every
/// inner vertex. Throws NotFeasible when the LED residuals exceed the
/// feasibility tolerance. Pass tol < 0 to use tol = 1e-9 * (1 + length).
RegularityReport classify_regularity(const LedTreeInstance& instance, double tol = -1.0);

/// First-order speed a parent vertex must move with so that the equal-depth
/// constraints stay satisfied, given the velocity of its child on the path.
/// Throws TangentDirectionForbidden when alpha_cur is tangent to the local
/// sheet (zero denominator).
double propagate_speed(double q_prev, const Point& alpha_prev, const Point& u_prev_minus,
                       const Point& u_prev_up, const Point& alpha_cur,
                       const Point& u_cur_minus, const Point& u_cur_plus);

/// A tangent direction of the feasible set supported on the root path of a
/// seed vertex: the seed moves with `seed_velocity` (tangent to its sheet),
/// every ancestor with the propagated velocity.
struct TangentDirection {
  int seed_vertex = -1;
  Point seed_velocity;
  std::vector<int> path;          // seed, ..., root
  std::vector<Point> velocities;  // one per path vertex

  /// Flat vector in R^(inner_count * dim), zero off the root path.
  Eigen::VectorXd flat(int inner_count, int dim) const;
};

/// Height-preserving tangent direction seeded at `seed` with velocity `w`
/// (w must be tangent to the seed's sheet). Ancestor velocities are chosen
/// orthogonal to their off-path child edge so their heights are preserved to
/// first order; the root, whose height is not preserved, follows the moving
/// equal-depth segment point when it lies on the segment and moves along its
/// sheet normal otherwise. Throws AntiparallelBlock when some on-path vertex
/// has antiparallel path/off-path edges and TangentDirectionForbidden when
/// no admissible ancestor direction exists.
TangentDirection height_preserving_direction(const LedTreeInstance& instance, int seed,
                                             const Point& w);

// ---------------------------------------------------------------------------
// Two-parameter feasibility probes for four collinear-ish leaves with
// parents X and Y constrained to lines parametrized by (s, t).
// ---------------------------------------------------------------------------

enum class PairRegionExample { NestedCollinear, ShiftedCollinear, Cross };

PairRegionExample parse_pair_region_example(const std::string& id);
const char* to_string(PairRegionExample example);

struct PairRegionParams {
  double a = 2.0;
  double c = 1.0;  // plays the role of the leaf half-offset d in ShiftedCollinear
};

/// Evaluates the exact existence inequality for the root given the (s, t)
/// parametrization of the two non-root inner vertices.
bool pair_region_membership(PairRegionExample example, const PairRegionParams& params,
                            double s, double t);

struct BoundaryCurve {
  enum class Kind { Hyperbola, QuarticOval, WholePlane };
  Kind kind = Kind::WholePlane;
  // Implicit polynomial sum(coefficients[monomial] * monomial) = 0 with
  // monomial keys "s2", "st", "t2", "s2t2", "1". Empty for WholePlane.
  std::map<std::string, double> coefficients;

  double evaluate(double s, double t) const;
};

BoundaryCurve pair_region_boundary(PairRegionExample example, const PairRegionParams& params);

/// Points on the boundary curve, sampled over s in [-range, range]; empty
/// for the whole-plane example.
std::vector<std::pair<double, double>> boundary_points(PairRegionExample example,
                                                       const PairRegionParams& params,
                                                       int count, double range);

struct GridProbeResult {
  int size = 0;
  double range = 0.0;
  std::vector<std::uint8_t> bitmap;  // row-major, 1 = feasible
  int feasible_components = 0;
  int holes = 0;  // infeasible components not touching the border
  bool all_feasible = false;

  bool cell(int row, int col) const {
    return bitmap[static_cast<size_t>(row) * static_cast<size_t>(size) +
                  static_cast<size_t>(col)] != 0;
  }
};

/// Samples membership on a size x size grid over [-range, range]^2 and
/// counts 4-connected components of the feasible set and its holes.
GridProbeResult grid_probe(PairRegionExample example, const PairRegionParams& params,
                           int size, double range);

}  // namespace ledtree
