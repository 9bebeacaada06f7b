#pragma once

#include <vector>

#include "ledtree/tree.hpp"

namespace ledtree {

/// Dual multipliers for the convex relaxation: one y per edge, one x per
/// inner vertex, and the slack lengths z (set to the edge lengths). The
/// structural identities
///   y_rootL + y_rootR = 2,   y_iR = 1 - x_i,   y_iL + y_iR = y_iU + 1
/// hold exactly by construction; the free residual of the recovery is the
/// per-vertex force balance sum(y_e * u_e) recorded in
/// vertex_equation_defect.
struct DualCertificate {
  Eigen::VectorXd y;  // per edge
  Eigen::VectorXd x;  // per inner vertex
  Eigen::VectorXd z;  // per edge
  Eigen::VectorXd vertex_equation_defect;  // per inner vertex
};

/// Recovers the multipliers top-down: the two root edges get y = 1, then at
/// every inner vertex the child multipliers solve the force-balance equation
/// in least squares restricted to the structural identity. Requires a
/// feasible regular instance; throws DegenerateDirections when the child
/// directions coincide.
DualCertificate recover_duals(const LedTreeInstance& instance);

struct KktBlock {
  double defect = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct KktReport {
  KktBlock stationarity_beta;   // force balance at every inner vertex
  KktBlock stationarity_z;      // structural identities
  KktBlock primal_feasibility;  // equal-depth constraints on z and f_j <= 0
  KktBlock complementarity;     // y^T f
  KktBlock positivity;          // y_j >= 0
  double min_y = 0.0;
  bool certified = false;       // all blocks pass and min_y strictly positive
};

/// Verifies the KKT system of the convex relaxation at (beta, z = lambda).
/// `tol` is relative to the mean edge length. Always returns a report.
KktReport verify_kkt(const LedTreeInstance& instance, const DualCertificate& certificate,
                     double tol);

struct VertexGeometry {
  int vertex = -1;
  bool is_root = false;
  bool is_root_child = false;
  bool directions_defined = false;  // false when an adjacent edge has zero length
  bool properly_forked = false;
  double fork_separation = 0.0;       // min pairwise distance of the incident directions
  double collinearity_defect = 0.0;   // ||uL + uR||, meaningful at the root
  double antiparallel_left = 0.0;     // ||uL + uU||
  double antiparallel_right = 0.0;    // ||uR + uU||
  double antiparallel_lr = 0.0;       // ||uL + uR||
  double coplanarity_defect = 0.0;    // smallest singular value of [uL uR uU]
  double child_angle = 0.0;           // angle between uL and uR
  bool cone_interior = false;         // -uU strictly inside cone(uL, uR)
  double cone_margin = 0.0;           // min coordinate of -uU in the {uL, uR} basis
};

struct GeometricReport {
  std::vector<VertexGeometry> vertices;
  double root_collinearity_defect = 0.0;
  double min_root_child_angle = 0.0;   // over inner children of the root
  double max_coplanarity_defect = 0.0;
  bool all_properly_forked = false;
};

/// Geometric stationary-point checks: root collinearity, antiparallel edge
/// pairs, coplanarity of the three incident directions, the root-children
/// angle bound and the cone-interior test (skipped at vertices that are not
/// properly forked). Necessary conditions only; always returns a report.
GeometricReport geometric_checks(const LedTreeInstance& instance, double tol);

}  // namespace ledtree
