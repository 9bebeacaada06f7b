#include "ledtree/certificate.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "ledtree/feasible_set.hpp"

namespace ledtree {

DualCertificate recover_duals(const LedTreeInstance& inst) {
  RegularityReport reg = classify_regularity(inst);
  if (!reg.regular)
    throw Error(ErrorCode::NotRegular, "dual recovery requires a regular instance");

  const TreeTopology& t = inst.topology();
  DualCertificate cert;
  cert.y = Eigen::VectorXd::Zero(t.edge_count());
  cert.x = Eigen::VectorXd::Zero(t.inner_count());
  cert.z = inst.edge_lengths();
  cert.vertex_equation_defect = Eigen::VectorXd::Zero(t.inner_count());

  const int root = t.root;
  const int el = t.edge_to_parent(t.left_child(root));
  const int er = t.edge_to_parent(t.right_child(root));
  cert.y[el] = 1.0;
  cert.y[er] = 1.0;
  cert.x[root] = 0.0;
  cert.vertex_equation_defect[root] = (inst.u_left(root) + inst.u_right(root)).norm();

  // Top-down: at vertex i the parent multiplier is known and the child
  // multipliers solve  yL*uL + yR*uR = -yU*uU  restricted to the structural
  // identity yL + yR = yU + 1 (one remaining degree of freedom).
  std::vector<int> order = t.inner_postorder();
  std::reverse(order.begin(), order.end());
  for (int i : order) {
    if (i == root) continue;
    const double y_up = cert.y[t.edge_to_parent(i)];
    const Point uL = inst.u_left(i);
    const Point uR = inst.u_right(i);
    const Point uU = inst.u_parent(i);
    const Point d = uL - uR;
    const double dd = d.squaredNorm();
    if (dd < 1e-24)
      throw Error(ErrorCode::DegenerateDirections,
                  "coincident child directions at vertex " + std::to_string(i), i);
    const double sum = y_up + 1.0;
    const Point base = sum * uR + y_up * uU;
    const double yL = -d.dot(base) / dd;
    const double yR = sum - yL;
    cert.y[t.edge_to_parent(t.left_child(i))] = yL;
    cert.y[t.edge_to_parent(t.right_child(i))] = yR;
    cert.x[i] = 1.0 - yR;
    cert.vertex_equation_defect[i] = (yL * uL + yR * uR + y_up * uU).norm();
  }
  return cert;
}

KktReport verify_kkt(const LedTreeInstance& inst, const DualCertificate& cert, double tol) {
  const TreeTopology& t = inst.topology();
  const int nv = t.inner_count();
  const int ne = t.edge_count();
  const double mean_len = inst.total_length() / ne;
  const double stat_tol = tol * std::max(mean_len, 1e-300);

  KktReport report;

  // Stationarity in beta: per-vertex force balance of the edge directions.
  double stat_defect = 0.0;
  for (int i = 0; i < nv; ++i) {
    Point balance = cert.y[t.edge_to_parent(t.left_child(i))] * inst.u_left(i) +
                    cert.y[t.edge_to_parent(t.right_child(i))] * inst.u_right(i);
    if (i != t.root) balance += cert.y[t.edge_to_parent(i)] * inst.u_parent(i);
    stat_defect = std::max(stat_defect, balance.norm());
  }
  report.stationarity_beta = {stat_defect, stat_tol, stat_defect <= stat_tol};

  // Stationarity in z: the structural identities on y and x.
  double struct_defect = std::abs(cert.y[t.edge_to_parent(t.left_child(t.root))] +
                                  cert.y[t.edge_to_parent(t.right_child(t.root))] - 2.0);
  for (int i = 0; i < nv; ++i) {
    struct_defect = std::max(
        struct_defect, std::abs(cert.y[t.edge_to_parent(t.right_child(i))] - (1.0 - cert.x[i])));
    if (i == t.root) continue;
    struct_defect =
        std::max(struct_defect, std::abs(cert.y[t.edge_to_parent(t.left_child(i))] +
                                         cert.y[t.edge_to_parent(t.right_child(i))] -
                                         cert.y[t.edge_to_parent(i)] - 1.0));
  }
  const double struct_tol = 1e-12 * (1.0 + cert.y.cwiseAbs().maxCoeff());
  report.stationarity_z = {struct_defect, struct_tol, struct_defect <= struct_tol};

  // Primal feasibility: equal-depth constraints on z and lambda_j <= z_j.
  double primal_defect = 0.0;
  for (int i = 0; i < nv; ++i) {
    double phi = 0.0;
    for (int j : t.left_path_edges[static_cast<size_t>(i)]) phi += cert.z[j];
    for (int j : t.right_path_edges[static_cast<size_t>(i)]) phi -= cert.z[j];
    primal_defect = std::max(primal_defect, std::abs(phi));
  }
  for (int j = 0; j < ne; ++j)
    primal_defect = std::max(primal_defect, inst.edge_length(j) - cert.z[j]);
  const double feas_tol = inst.feasibility_tolerance();
  report.primal_feasibility = {primal_defect, feas_tol, primal_defect <= feas_tol};

  // Complementarity: y^T f with f_j = lambda_j - z_j.
  double comp = 0.0;
  for (int j = 0; j < ne; ++j) comp += cert.y[j] * (inst.edge_length(j) - cert.z[j]);
  comp = std::abs(comp);
  report.complementarity = {comp, feas_tol, comp <= feas_tol};

  report.min_y = cert.y.minCoeff();
  report.positivity = {-report.min_y, 0.0, report.min_y >= 0.0};

  report.certified = report.stationarity_beta.pass && report.stationarity_z.pass &&
                     report.primal_feasibility.pass && report.complementarity.pass &&
                     report.min_y > 0.0;
  return report;
}

GeometricReport geometric_checks(const LedTreeInstance& inst, double tol) {
  const TreeTopology& t = inst.topology();
  const int nv = t.inner_count();

  GeometricReport report;
  report.vertices.resize(static_cast<size_t>(nv));
  report.min_root_child_angle = M_PI;  // vacuous when the root has no inner children
  report.all_properly_forked = true;

  for (int i = 0; i < nv; ++i) {
    VertexGeometry& g = report.vertices[static_cast<size_t>(i)];
    g.vertex = i;
    g.is_root = (i == t.root);
    g.is_root_child = !g.is_root && t.parent[static_cast<size_t>(i)] == t.root;

    const double len_l = inst.edge_length(t.edge_to_parent(t.left_child(i)));
    const double len_r = inst.edge_length(t.edge_to_parent(t.right_child(i)));
    const double len_u = g.is_root ? 1.0 : inst.edge_length(t.edge_to_parent(i));
    if (len_l <= 0.0 || len_r <= 0.0 || len_u <= 0.0) {
      g.directions_defined = false;
      g.properly_forked = false;
      report.all_properly_forked = false;
      continue;
    }
    g.directions_defined = true;

    const Point uL = inst.u_left(i);
    const Point uR = inst.u_right(i);
    g.antiparallel_lr = (uL + uR).norm();
    g.child_angle = std::acos(std::clamp(uL.dot(uR), -1.0, 1.0));

    if (g.is_root) {
      g.collinearity_defect = g.antiparallel_lr;
      report.root_collinearity_defect = g.collinearity_defect;
      g.fork_separation = (uL - uR).norm();
      g.properly_forked = true;  // the root condition is collinearity, not forking
      continue;
    }

    const Point uU = inst.u_parent(i);
    g.antiparallel_left = (uL + uU).norm();
    g.antiparallel_right = (uR + uU).norm();
    g.fork_separation =
        std::min({(uL - uR).norm(), (uL - uU).norm(), (uR - uU).norm()});
    g.properly_forked = g.fork_separation > tol;
    if (!g.properly_forked) report.all_properly_forked = false;

    // Coplanarity: third singular value of the 3-column direction matrix
    // (identically zero in the plane).
    const int n = inst.dim();
    Eigen::MatrixXd dirs(n, 3);
    dirs.col(0) = uL;
    dirs.col(1) = uR;
    dirs.col(2) = uU;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dirs);
    const auto& sv = svd.singularValues();
    g.coplanarity_defect = sv.size() >= 3 ? sv[2] : 0.0;
    report.max_coplanarity_defect = std::max(report.max_coplanarity_defect, g.coplanarity_defect);

    if (g.is_root_child)
      report.min_root_child_angle = std::min(report.min_root_child_angle, g.child_angle);

    // -uU in the relative interior of cone(uL, uR): positive coordinates in
    // the (generally non-orthogonal) {uL, uR} basis, solved in-plane.
    if (g.properly_forked) {
      Eigen::Matrix2d gram;
      gram << 1.0, uL.dot(uR), uL.dot(uR), 1.0;
      Eigen::Vector2d rhs(-uU.dot(uL), -uU.dot(uR));
      const double det = gram.determinant();
      if (std::abs(det) > 1e-24) {
        Eigen::Vector2d coords = gram.inverse() * rhs;
        g.cone_margin = std::min(coords[0], coords[1]);
        g.cone_interior = g.cone_margin > tol;
      }
    }
  }

  return report;
}

}  // namespace ledtree
