#include "ledtree/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include "ledtree/certificate.hpp"
#include "ledtree/feasible_set.hpp"
#include "ledtree/log.hpp"

namespace ledtree {

SolveMethod parse_solve_method(const std::string& name) {
  if (name == "relaxation_interior") return SolveMethod::RelaxationInterior;
  if (name == "penalty_descent") return SolveMethod::PenaltyDescent;
  throw Error(ErrorCode::InvalidInput, "unknown solve method '" + name + "'");
}

const char* to_string(SolveMethod method) {
  return method == SolveMethod::RelaxationInterior ? "relaxation_interior" : "penalty_descent";
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::CertifiedOptimal: return "certified_optimal";
    case SolveStatus::StationaryUncertified: return "stationary_uncertified";
    case SolveStatus::NoStationaryPoint: return "no_stationary_point";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Flattened numerics shared by the barrier, the penalty fallback and the
// polishing Newton. Inner vertex i occupies the coordinate block
// [i*dim, (i+1)*dim) of the flat variable.
struct Model {
  const HangingType* ht;
  int n, nv, ne, nvars;
  MatrixXd Phi;  // nv x ne constraint matrix: +1 on left-path edges, -1 on right-path edges

  explicit Model(const HangingType& h) : ht(&h) {
    const TreeTopology& t = h.topology;
    n = h.dim;
    nv = t.inner_count();
    ne = t.edge_count();
    nvars = nv * n;
    Phi = MatrixXd::Zero(nv, ne);
    for (int i = 0; i < nv; ++i) {
      for (int j : t.left_path_edges[static_cast<size_t>(i)]) Phi(i, j) += 1.0;
      for (int j : t.right_path_edges[static_cast<size_t>(i)]) Phi(i, j) -= 1.0;
    }
  }

  const TreeTopology& topo() const { return ht->topology; }

  Eigen::Map<const VectorXd> block(const VectorXd& beta, int i) const {
    return Eigen::Map<const VectorXd>(beta.data() + static_cast<size_t>(i) * n, n);
  }

  // Edge vector d_j = pos(parent) - pos(child).
  VectorXd edge_vector(const VectorXd& beta, int j) const {
    const auto& e = topo().edges[static_cast<size_t>(j)];
    VectorXd d = block(beta, e.parent);
    if (topo().is_leaf(e.child))
      d -= ht->leaf_position(e.child);
    else
      d -= block(beta, e.child);
    return d;
  }

  // Smoothed lengths sqrt(|d|^2 + mu^2) - mu; exact when mu == 0.
  VectorXd lengths(const VectorXd& beta, double mu) const {
    VectorXd out(ne);
    for (int j = 0; j < ne; ++j)
      out[j] = std::sqrt(edge_vector(beta, j).squaredNorm() + mu * mu) - mu;
    return out;
  }

  // Jacobian of the (smoothed) lengths, ne x nvars.
  MatrixXd length_jacobian(const VectorXd& beta, double mu) const {
    MatrixXd J = MatrixXd::Zero(ne, nvars);
    for (int j = 0; j < ne; ++j) {
      const auto& e = topo().edges[static_cast<size_t>(j)];
      const VectorXd d = edge_vector(beta, j);
      const double rho = std::sqrt(d.squaredNorm() + mu * mu);
      if (rho <= 0.0) continue;
      const VectorXd g = d / rho;
      J.row(j).segment(e.parent * n, n) += g.transpose();
      if (!topo().is_leaf(e.child)) J.row(j).segment(e.child * n, n) -= g.transpose();
    }
    return J;
  }

  // sum_j w_j * Hess(lambda_j), nvars x nvars.
  MatrixXd weighted_hessian(const VectorXd& beta, const VectorXd& w, double mu) const {
    MatrixXd H = MatrixXd::Zero(nvars, nvars);
    for (int j = 0; j < ne; ++j) {
      if (w[j] == 0.0) continue;
      const auto& e = topo().edges[static_cast<size_t>(j)];
      const VectorXd d = edge_vector(beta, j);
      const double rho2 = d.squaredNorm() + mu * mu;
      const double rho = std::sqrt(rho2);
      if (rho <= 0.0) continue;
      MatrixXd B = (MatrixXd::Identity(n, n) - (d * d.transpose()) / rho2) * (w[j] / rho);
      const int p = e.parent * n;
      H.block(p, p, n, n) += B;
      if (!topo().is_leaf(e.child)) {
        const int c = e.child * n;
        H.block(c, c, n, n) += B;
        H.block(p, c, n, n) -= B;
        H.block(c, p, n, n) -= B;
      }
    }
    return H;
  }

  VectorXd residuals(const VectorXd& beta, double mu) const { return Phi * lengths(beta, mu); }

  // Positive combinatorial vector in the null space of Phi: edge weights
  // t(parent) - t(child) for the integral node heights t.
  VectorXd positive_null_vector() const {
    const TreeTopology& t = topo();
    std::vector<int> combh(static_cast<size_t>(t.vertex_count()), 0);
    for (int v : t.inner_postorder())
      combh[static_cast<size_t>(v)] =
          1 + std::max(combh[static_cast<size_t>(t.left_child(v))],
                       combh[static_cast<size_t>(t.right_child(v))]);
    VectorXd dz(ne);
    for (int j = 0; j < ne; ++j) {
      const auto& e = t.edges[static_cast<size_t>(j)];
      dz[j] = combh[static_cast<size_t>(e.parent)] - combh[static_cast<size_t>(e.child)];
    }
    return dz;
  }
};

struct BarrierResult {
  VectorXd beta;
  VectorXd z;
  VectorXd slack;
  VectorXd y;  // multiplier estimates mu / slack
  int iterations = 0;
  bool converged = false;
  bool boundary_drift = false;
};

double barrier_value(const Model& m, const VectorXd& beta, const VectorXd& z, double mu,
                     double mus) {
  const VectorXd lam = m.lengths(beta, mus);
  double value = z.sum();
  for (int j = 0; j < m.ne; ++j) {
    const double s = z[j] - lam[j];
    if (s <= 0.0) return std::numeric_limits<double>::infinity();
    value -= mu * std::log(s);
  }
  return value;
}

BarrierResult solve_barrier(const Model& m, const VectorXd& beta0, int max_iters) {
  BarrierResult res;
  res.beta = beta0;

  // Null-space basis of the linear constraints on z.
  Eigen::FullPivLU<MatrixXd> lu(m.Phi);
  MatrixXd N = lu.kernel();
  const int nt = static_cast<int>(N.cols());

  // Strictly interior start: project the current lengths onto the constraint
  // plane, then push along the positive null vector until all slacks open up.
  const VectorXd dz = m.positive_null_vector();
  Eigen::LLT<MatrixXd> gram(m.Phi * m.Phi.transpose());
  VectorXd lam0 = m.lengths(beta0, 0.0);
  const double L0 = 1.0 + lam0.sum();
  VectorXd zbase = lam0 - m.Phi.transpose() * gram.solve(m.Phi * lam0);
  double theta = 0.05 * L0 / dz.maxCoeff();
  VectorXd z = zbase + theta * dz;
  for (int guard = 0; guard < 200 && (z - lam0).minCoeff() < 1e-3 * theta * dz.minCoeff();
       ++guard) {
    theta *= 2.0;
    z = zbase + theta * dz;
  }

  VectorXd beta = beta0;
  VectorXd tvec = VectorXd::Zero(nt);
  const VectorXd zanchor = z;

  double mu = (z - lam0).mean();
  const double scale = 1.0 + z.sum();
  const double mu_min = 1e-10 * scale;
  int drift_iterations = 0;  // consecutive iterations pinned at the regularity boundary

  while (true) {
    const double mus = std::clamp(0.01 * mu, 1e-10 * scale, 1e-6 * scale);
    for (int inner = 0; inner < 60; ++inner) {
      if (res.iterations >= max_iters) return res;
      ++res.iterations;

      const VectorXd lam = m.lengths(beta, mus);
      if (lam.minCoeff() < 1e-7 * scale) {
        if (++drift_iterations >= 50) res.boundary_drift = true;
      } else {
        drift_iterations = 0;
      }
      const MatrixXd J = m.length_jacobian(beta, mus);
      const VectorXd s = z - lam;
      const VectorXd inv_s = s.cwiseInverse();
      const VectorXd w1 = mu * inv_s;                     // mu / s
      const VectorXd w2 = w1.cwiseProduct(inv_s);         // mu / s^2

      VectorXd grad_beta = J.transpose() * w1;
      VectorXd grad_t = N.transpose() * (VectorXd::Ones(m.ne) - w1);

      MatrixXd Hbb = J.transpose() * w2.asDiagonal() * J + m.weighted_hessian(beta, w1, mus);
      MatrixXd Hbt = -J.transpose() * w2.asDiagonal() * N;
      MatrixXd Htt = N.transpose() * w2.asDiagonal() * N;

      const int dim = m.nvars + nt;
      MatrixXd M(dim, dim);
      M.topLeftCorner(m.nvars, m.nvars) = Hbb;
      M.topRightCorner(m.nvars, nt) = Hbt;
      M.bottomLeftCorner(nt, m.nvars) = Hbt.transpose();
      M.bottomRightCorner(nt, nt) = Htt;
      const double ridge = 1e-12 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
      M.diagonal().array() += ridge;

      VectorXd g(dim);
      g.head(m.nvars) = grad_beta;
      g.tail(nt) = grad_t;

      Eigen::LDLT<MatrixXd> ldlt(M);
      VectorXd step = -ldlt.solve(g);
      if (!step.allFinite()) step = -Eigen::FullPivLU<MatrixXd>(M).solve(g);

      const double decrement = -g.dot(step);
      if (!(decrement > 0.0)) break;
      if (0.5 * decrement <= std::max(1e-13 * scale, 1e-4 * mu)) break;

      const VectorXd dbeta = step.head(m.nvars);
      const VectorXd dt = step.tail(nt);
      const VectorXd dzv = N * dt;
      const VectorXd ds = dzv - J * dbeta;

      double alpha = 1.0;
      for (int j = 0; j < m.ne; ++j)
        if (ds[j] < 0.0) alpha = std::min(alpha, -0.99 * s[j] / ds[j]);

      const double f0 = barrier_value(m, beta, z, mu, mus);
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls) {
        const VectorXd beta_try = beta + alpha * dbeta;
        const VectorXd z_try = zanchor + N * (tvec + alpha * dt);
        const double f_try = barrier_value(m, beta_try, z_try, mu, mus);
        if (f_try < f0 - 1e-4 * alpha * decrement) {
          beta = beta_try;
          tvec += alpha * dt;
          z = z_try;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
    }

    log::debug("barrier stage mu=" + std::to_string(mu) + " iterations=" +
               std::to_string(res.iterations));
    if (mu <= mu_min) break;
    mu = std::max(0.2 * mu, mu_min * 0.999);
  }

  res.beta = beta;
  res.z = z;
  res.slack = z - m.lengths(beta, 0.0);
  // Central-path multiplier estimates; the floor keeps them bounded when an
  // active slack underflows (the exact length sits slightly above the
  // smoothed one used inside the barrier).
  res.y = VectorXd(m.ne);
  for (int j = 0; j < m.ne; ++j) res.y[j] = mu / std::max(res.slack[j], 1e-3 * mu);
  if (m.lengths(beta, 0.0).minCoeff() < 1e-7 * scale) res.boundary_drift = true;
  res.converged = true;
  return res;
}

// Quadratic-penalty descent on the original problem; fallback method.
struct PenaltyResult {
  VectorXd beta;
  int iterations = 0;
  bool converged = false;
};

PenaltyResult solve_penalty(const Model& m, const VectorXd& beta0, int max_iters) {
  PenaltyResult res;
  VectorXd beta = beta0;
  const double scale = 1.0 + m.lengths(beta0, 0.0).sum();
  double weight = 10.0 / scale;
  double mus = 1e-4 * scale;

  for (int outer = 0; outer < 14; ++outer) {
    for (int inner = 0; inner < 50; ++inner) {
      if (res.iterations >= max_iters) return res;
      ++res.iterations;

      const VectorXd lam = m.lengths(beta, mus);
      const MatrixXd J = m.length_jacobian(beta, mus);
      const VectorXd r = m.Phi * lam;
      const MatrixXd Jg = m.Phi * J;

      VectorXd grad = J.colwise().sum().transpose() + weight * (Jg.transpose() * r);
      MatrixXd H = m.weighted_hessian(beta, VectorXd::Ones(m.ne), mus) +
                   weight * (Jg.transpose() * Jg);
      H.diagonal().array() += 1e-10 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());

      VectorXd step = -Eigen::LDLT<MatrixXd>(H).solve(grad);
      const double decrement = -grad.dot(step);
      if (!(decrement > 0.0) || 0.5 * decrement <= 1e-14 * scale) break;

      auto value = [&](const VectorXd& b) {
        const VectorXd l = m.lengths(b, mus);
        const VectorXd rr = m.Phi * l;
        return l.sum() + 0.5 * weight * rr.squaredNorm();
      };
      const double f0 = value(beta);
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls) {
        const VectorXd beta_try = beta + alpha * step;
        if (value(beta_try) < f0 - 1e-4 * alpha * decrement) {
          beta = beta_try;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
    }
    weight *= 8.0;
    mus = std::max(0.3 * mus, 1e-10 * scale);
  }
  res.beta = beta;
  res.converged = true;
  return res;
}

struct PolishResult {
  VectorXd beta;
  VectorXd nu;
  double final_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Newton on the first-order conditions of the original problem:
//   sum_j (1 + (Phi^T nu)_j) grad(lambda_j) = 0,   Phi lambda(beta) = 0.
PolishResult polish_kkt(const Model& m, VectorXd beta, VectorXd nu, int max_iters) {
  PolishResult res;
  res.beta = beta;
  res.nu = nu;
  const double scale = 1.0 + m.lengths(beta, 0.0).sum();
  const double tol = 1e-12 * scale;

  auto system = [&](const VectorXd& b, const VectorXd& v, VectorXd& F) -> bool {
    const VectorXd lam = m.lengths(b, 0.0);
    if (lam.minCoeff() < 1e-12 * scale) return false;
    const MatrixXd J = m.length_jacobian(b, 0.0);
    const VectorXd y = VectorXd::Ones(m.ne) + m.Phi.transpose() * v;
    F.resize(m.nvars + m.nv);
    F.head(m.nvars) = J.transpose() * y;
    F.tail(m.nv) = m.Phi * lam;
    return true;
  };

  VectorXd F;
  if (!system(beta, nu, F)) return res;

  for (int it = 0; it < max_iters; ++it) {
    ++res.iterations;
    const double fnorm = F.lpNorm<Eigen::Infinity>();
    res.final_norm = fnorm;
    if (fnorm <= tol) {
      res.converged = true;
      break;
    }

    const MatrixXd J = m.length_jacobian(beta, 0.0);
    const VectorXd y = VectorXd::Ones(m.ne) + m.Phi.transpose() * nu;
    const MatrixXd W = m.weighted_hessian(beta, y, 0.0);
    const MatrixXd Jg = m.Phi * J;

    const int dim = m.nvars + m.nv;
    MatrixXd K = MatrixXd::Zero(dim, dim);
    K.topLeftCorner(m.nvars, m.nvars) = W;
    K.topRightCorner(m.nvars, m.nv) = Jg.transpose();
    K.bottomLeftCorner(m.nv, m.nvars) = Jg;

    VectorXd step = Eigen::FullPivLU<MatrixXd>(K).solve(-F);
    if (!step.allFinite()) break;

    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      VectorXd beta_try = beta + alpha * step.head(m.nvars);
      VectorXd nu_try = nu + alpha * step.tail(m.nv);
      VectorXd F_try;
      if (system(beta_try, nu_try, F_try) &&
          F_try.lpNorm<Eigen::Infinity>() < (1.0 - 1e-4 * alpha) * fnorm) {
        beta = beta_try;
        nu = nu_try;
        F = F_try;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  res.beta = beta;
  res.nu = nu;
  res.final_norm = F.lpNorm<Eigen::Infinity>();
  if (res.final_norm <= tol) res.converged = true;
  return res;
}

Point random_unit_orthogonal(std::mt19937_64& rng, const Point& axis) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = static_cast<int>(axis.size());
  for (int attempt = 0; attempt < 64; ++attempt) {
    Point v(n);
    for (int k = 0; k < n; ++k) v[k] = gauss(rng);
    v -= v.dot(axis) * axis;
    const double norm = v.norm();
    if (norm > 1e-8) return v / norm;
  }
  return Point::Zero(n);
}

struct SingleOutcome {
  bool valid = false;
  bool converged = false;  // iteration budget respected
  SolveStatus status = SolveStatus::Infeasible;
  VectorXd beta;
  VectorXd z;
  double length = 0.0;
  double max_residual = 0.0;
  double max_slack = 0.0;
  double stationarity_defect = 0.0;
  double min_multiplier = 0.0;
  bool boundary = false;
  int iterations = 0;
};

SingleOutcome single_solve(const std::shared_ptr<const HangingType>& ht, const Placement& init,
                           const SolveOptions& options) {
  Model m(*ht);
  SingleOutcome out;
  VectorXd beta0 = init.flat();

  VectorXd beta;
  VectorXd z;
  bool boundary = false;
  if (options.method == SolveMethod::RelaxationInterior) {
    BarrierResult br = solve_barrier(m, beta0, options.max_iterations);
    out.iterations = br.iterations;
    if (!br.converged) return out;  // iteration cap
    out.converged = true;
    beta = br.beta;
    z = br.z;
    boundary = br.boundary_drift;
    const double scale = 1.0 + z.sum();
    out.max_slack = br.slack.maxCoeff();
    if (out.max_slack > 1e-6 * scale) {
      // A slack (curved) edge at the relaxation optimum: no properly forked
      // stationary point of the original problem exists.
      out.valid = true;
      out.boundary = true;
      out.status = SolveStatus::NoStationaryPoint;
      out.beta = beta;
      out.z = z;
      const VectorXd lam = m.lengths(beta, 0.0);
      out.length = lam.sum();
      out.max_residual = m.residuals(beta, 0.0).cwiseAbs().maxCoeff();
      return out;
    }
    // Multiplier estimate for the polish start.
    Eigen::LLT<MatrixXd> gram(m.Phi * m.Phi.transpose());
    VectorXd nu0 = gram.solve(m.Phi * (br.y - VectorXd::Ones(m.ne)));
    PolishResult pr = polish_kkt(m, beta, nu0, 60);
    out.iterations += pr.iterations;
    if (pr.converged) beta = pr.beta;
    out.stationarity_defect = pr.final_norm;
  } else {
    PenaltyResult pen = solve_penalty(m, beta0, options.max_iterations);
    out.iterations = pen.iterations;
    if (!pen.converged) return out;
    out.converged = true;
    beta = pen.beta;
    PolishResult pr = polish_kkt(m, beta, VectorXd::Zero(m.nv), 60);
    out.iterations += pr.iterations;
    if (pr.converged) beta = pr.beta;
    out.stationarity_defect = pr.final_norm;
    z = m.lengths(beta, 0.0);
  }

  // Snap the root to the exact segment point when the optimality geometry
  // says it lies there.
  Placement placement = Placement::from_flat(beta, m.nv, m.n);
  LedTreeInstance inst = evaluate(ht, placement);
  const TreeTopology& t = ht->topology;
  const int cl = t.left_child(t.root);
  const int cr = t.right_child(t.root);
  const double ell = inst.edge_length(t.edge_to_parent(cl));
  const double elr = inst.edge_length(t.edge_to_parent(cr));
  if (ell > 0.0 && elr > 0.0 && (inst.u_left(t.root) + inst.u_right(t.root)).norm() < 1e-6) {
    try {
      placement.inner[static_cast<size_t>(t.root)] = root_on_segment(
          inst.position(cl), inst.position(cr), inst.height(cl), inst.height(cr));
      inst = evaluate(ht, placement);
    } catch (const Error&) {
      // keep the unsnapped root
    }
  }

  out.valid = true;
  out.beta = inst.placement().flat();
  out.length = inst.total_length();
  out.max_residual = led_residuals(inst).cwiseAbs().maxCoeff();
  out.boundary = boundary;
  out.z = inst.edge_lengths();

  const double feas_tol = std::max(options.tol_feas * (1.0 + inst.total_length()),
                                   inst.feasibility_tolerance());
  if (out.max_residual > feas_tol) {
    out.status = SolveStatus::StationaryUncertified;
    return out;
  }
  RegularityReport reg = classify_regularity(inst);
  if (!reg.regular) {
    out.status = SolveStatus::StationaryUncertified;
    out.boundary = true;
    return out;
  }
  try {
    DualCertificate cert = recover_duals(inst);
    KktReport report = verify_kkt(inst, cert, options.tol_stat);
    out.min_multiplier = report.min_y;
    out.status =
        report.certified ? SolveStatus::CertifiedOptimal : SolveStatus::StationaryUncertified;
  } catch (const Error&) {
    out.status = SolveStatus::StationaryUncertified;
  }
  return out;
}

int status_rank(SolveStatus s) {
  switch (s) {
    case SolveStatus::CertifiedOptimal: return 0;
    case SolveStatus::StationaryUncertified: return 1;
    case SolveStatus::NoStationaryPoint: return 2;
    case SolveStatus::Infeasible: return 3;
  }
  return 4;
}

double leaf_diameter(const HangingType& ht) {
  double diam = 0.0;
  for (size_t i = 0; i < ht.leaf_coords.size(); ++i)
    for (size_t k = i + 1; k < ht.leaf_coords.size(); ++k)
      diam = std::max(diam, (ht.leaf_coords[i] - ht.leaf_coords[k]).norm());
  return diam;
}

}  // namespace

Placement stretched_tree(const HangingType& ht) {
  ht.validate();
  const TreeTopology& t = ht.topology;
  Placement placement = Placement::zeros(t.inner_count(), ht.dim);
  std::vector<Point> positions(static_cast<size_t>(t.vertex_count()));
  std::vector<double> heights(static_cast<size_t>(t.vertex_count()), 0.0);
  for (int v = t.inner_count(); v < t.vertex_count(); ++v)
    positions[static_cast<size_t>(v)] = ht.leaf_position(v);

  for (int v : t.inner_postorder()) {
    const int a = t.left_child(v);
    const int b = t.right_child(v);
    const Point& pa = positions[static_cast<size_t>(a)];
    const Point& pb = positions[static_cast<size_t>(b)];
    const double ha = heights[static_cast<size_t>(a)];
    const double hb = heights[static_cast<size_t>(b)];
    Point p;
    if ((pa - pb).norm() == 0.0) {
      if (std::abs(ha - hb) > 0.0)
        throw Error(ErrorCode::StretchInfeasible,
                    "coincident children with different heights at vertex " + std::to_string(v),
                    v);
      p = pa;
    } else {
      try {
        p = root_on_segment(pa, pb, ha, hb);
      } catch (const Error& e) {
        throw Error(ErrorCode::StretchInfeasible,
                    "no equal-depth point for the children of vertex " + std::to_string(v) +
                        " (" + e.what() + ")",
                    v);
      }
    }
    positions[static_cast<size_t>(v)] = p;
    heights[static_cast<size_t>(v)] = std::max((p - pa).norm() + ha, (p - pb).norm() + hb);
    placement.inner[static_cast<size_t>(v)] = p;
  }
  return placement;
}

Placement perturbed_stretched_tree(const HangingType& ht, std::uint64_t seed, double relative) {
  ht.validate();
  const TreeTopology& t = ht.topology;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);

  Placement placement = Placement::zeros(t.inner_count(), ht.dim);
  std::vector<Point> positions(static_cast<size_t>(t.vertex_count()));
  std::vector<double> heights(static_cast<size_t>(t.vertex_count()), 0.0);
  for (int v = t.inner_count(); v < t.vertex_count(); ++v)
    positions[static_cast<size_t>(v)] = ht.leaf_position(v);

  for (int v : t.inner_postorder()) {
    const int a = t.left_child(v);
    const int b = t.right_child(v);
    const Point& pa = positions[static_cast<size_t>(a)];
    const Point& pb = positions[static_cast<size_t>(b)];
    const double ha = heights[static_cast<size_t>(a)];
    const double hb = heights[static_cast<size_t>(b)];
    Point p;
    if ((pa - pb).norm() == 0.0) {
      if (std::abs(ha - hb) > 0.0)
        throw Error(ErrorCode::StretchInfeasible, "coincident children at vertex " +
                                                      std::to_string(v), v);
      p = pa;
    } else {
      HyperboloidSheet sheet;
      try {
        sheet = hyperboloid_sheet(pa, pb, ha, hb);
      } catch (const Error& e) {
        throw Error(ErrorCode::StretchInfeasible,
                    "no admissible sheet at vertex " + std::to_string(v) + " (" + e.what() + ")",
                    v);
      }
      const double local = 0.5 * ((pa - pb).norm() + ha + hb) + 1e-12;
      const double rho = relative * local * uniform(rng);
      if (ht.dim == 1) {
        p = root_on_segment(pa, pb, ha, hb);
      } else {
        const Point transverse = random_unit_orthogonal(rng, sheet.axis);
        p = sheet.point_at_offset(rho, transverse);
      }
    }
    positions[static_cast<size_t>(v)] = p;
    heights[static_cast<size_t>(v)] = std::max((p - pa).norm() + ha, (p - pb).norm() + hb);
    placement.inner[static_cast<size_t>(v)] = p;
  }
  return placement;
}

std::optional<Placement> restore_feasibility(const HangingType& ht, const Placement& start) {
  Model m(ht);
  VectorXd beta = start.flat();
  const double scale = 1.0 + m.lengths(beta, 0.0).sum();
  const double mus = 1e-8 * scale;
  double prev = std::numeric_limits<double>::infinity();

  for (int it = 0; it < 200; ++it) {
    const VectorXd r = m.residuals(beta, mus);
    const double rnorm = r.lpNorm<Eigen::Infinity>();
    if (rnorm <= 1e-11 * scale) return Placement::from_flat(beta, m.nv, m.n);
    if (rnorm > prev - 1e-15 * scale && it > 10) break;  // stalled
    prev = std::min(prev, rnorm);

    const MatrixXd J = m.Phi * m.length_jacobian(beta, mus);
    MatrixXd JJt = J * J.transpose();
    JJt.diagonal().array() += 1e-12 * std::max(1.0, JJt.diagonal().cwiseAbs().maxCoeff());
    VectorXd step = -J.transpose() * Eigen::LLT<MatrixXd>(JJt).solve(r);

    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      VectorXd beta_try = beta + alpha * step;
      if (m.residuals(beta_try, mus).lpNorm<Eigen::Infinity>() < rnorm) {
        beta = beta_try;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  const VectorXd r = m.residuals(beta, 0.0);
  if (r.lpNorm<Eigen::Infinity>() <= 1e-10 * scale)
    return Placement::from_flat(beta, m.nv, m.n);
  return std::nullopt;
}

namespace {

// Child-midpoint heuristic start used when the stretched tree does not exist.
Placement midpoint_placement(const HangingType& ht) {
  const TreeTopology& t = ht.topology;
  Placement placement = Placement::zeros(t.inner_count(), ht.dim);
  std::vector<Point> positions(static_cast<size_t>(t.vertex_count()));
  for (int v = t.inner_count(); v < t.vertex_count(); ++v)
    positions[static_cast<size_t>(v)] = ht.leaf_position(v);
  for (int v : t.inner_postorder()) {
    positions[static_cast<size_t>(v)] = 0.5 * (positions[static_cast<size_t>(t.left_child(v))] +
                                               positions[static_cast<size_t>(t.right_child(v))]);
    placement.inner[static_cast<size_t>(v)] = positions[static_cast<size_t>(v)];
  }
  return placement;
}

Placement jittered(const Placement& base, const HangingType& ht, std::uint64_t seed,
                   double relative) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = leaf_diameter(ht) + 1.0;
  Placement out = base;
  for (auto& p : out.inner)
    for (int k = 0; k < p.size(); ++k) p[k] += relative * scale * gauss(rng);
  return out;
}

}  // namespace

Solution minimize(const HangingType& ht, const Placement& init, const SolveOptions& options) {
  ht.validate();
  auto shared = std::make_shared<const HangingType>(ht);
  const int restarts = std::max(1, options.restarts);

  std::vector<std::optional<Placement>> inits(static_cast<size_t>(restarts));
  inits[0] = init;
  for (int k = 1; k < restarts; ++k) {
    try {
      inits[static_cast<size_t>(k)] =
          perturbed_stretched_tree(ht, options.seed + static_cast<std::uint64_t>(k),
                                   options.restart_perturbation);
    } catch (const Error&) {
      auto restored = restore_feasibility(
          ht, jittered(init, ht, options.seed + static_cast<std::uint64_t>(k),
                       options.restart_perturbation));
      if (restored) inits[static_cast<size_t>(k)] = *restored;
    }
  }

  std::vector<SingleOutcome> outcomes(static_cast<size_t>(restarts));
  auto run = [&](int k) {
    if (inits[static_cast<size_t>(k)])
      outcomes[static_cast<size_t>(k)] =
          single_solve(shared, *inits[static_cast<size_t>(k)], options);
  };
  if (options.concurrent_restarts && restarts > 1) {
    std::vector<std::future<void>> futures;
    futures.reserve(static_cast<size_t>(restarts));
    for (int k = 0; k < restarts; ++k)
      futures.push_back(std::async(std::launch::async, run, k));
    for (auto& f : futures) f.get();
  } else {
    for (int k = 0; k < restarts; ++k) run(k);
  }

  int best = -1;
  bool any_attempt = false;
  bool any_converged = false;
  for (int k = 0; k < restarts; ++k) {
    const SingleOutcome& o = outcomes[static_cast<size_t>(k)];
    if (!inits[static_cast<size_t>(k)]) continue;
    any_attempt = true;
    if (o.converged) any_converged = true;
    if (!o.valid) continue;
    if (best < 0) {
      best = k;
      continue;
    }
    const SingleOutcome& b = outcomes[static_cast<size_t>(best)];
    if (status_rank(o.status) < status_rank(b.status) ||
        (status_rank(o.status) == status_rank(b.status) && o.length < b.length))
      best = k;
  }
  if (!any_attempt) {
    Solution sol;
    sol.status = SolveStatus::Infeasible;
    return sol;
  }
  if (best < 0) {
    if (!any_converged)
      throw Error(ErrorCode::NonConvergence, "iteration cap reached on every restart");
    Solution sol;
    sol.status = SolveStatus::Infeasible;
    return sol;
  }

  const SingleOutcome& bo = outcomes[static_cast<size_t>(best)];
  Solution sol;
  sol.placement = Placement::from_flat(bo.beta, ht.topology.inner_count(), ht.dim);
  sol.relaxed_lengths = bo.z;
  sol.length = bo.length;
  sol.status = bo.status;
  sol.hit_regularity_boundary = bo.boundary;
  sol.stationarity_defect = bo.stationarity_defect;
  sol.max_residual = bo.max_residual;
  sol.max_slack = bo.max_slack;
  sol.min_multiplier = bo.min_multiplier;

  // Infeasibility refinement: a slack relaxation optimum on a hanging type
  // with an empty feasible set should be reported as infeasible.
  if (sol.status == SolveStatus::NoStationaryPoint) {
    bool feasible_somewhere = bo.max_residual <= options.tol_feas * (1.0 + bo.length);
    if (!feasible_somewhere)
      feasible_somewhere = restore_feasibility(ht, sol.placement).has_value() ||
                           restore_feasibility(ht, midpoint_placement(ht)).has_value();
    if (!feasible_somewhere) sol.status = SolveStatus::Infeasible;
  }

  const double diam = leaf_diameter(ht) + 1e-300;
  double max_disagreement = 0.0;
  for (int k = 0; k < restarts; ++k) {
    const SingleOutcome& o = outcomes[static_cast<size_t>(k)];
    if (!o.valid) continue;
    RestartSummary rs;
    rs.index = k;
    rs.status = o.status;
    rs.length = o.length;
    rs.newton_iterations = o.iterations;
    rs.placement = Placement::from_flat(o.beta, ht.topology.inner_count(), ht.dim);
    sol.restarts.push_back(std::move(rs));
    sol.newton_iterations += o.iterations;
    if (o.status == SolveStatus::CertifiedOptimal &&
        bo.status == SolveStatus::CertifiedOptimal)
      max_disagreement =
          std::max(max_disagreement, (o.beta - bo.beta).lpNorm<Eigen::Infinity>() / diam);
  }
  if (max_disagreement > 1e-6)
    log::info("certified restarts disagree by relative " + std::to_string(max_disagreement));

  return sol;
}

Solution minimize(const HangingType& ht, const SolveOptions& options) {
  ht.validate();
  Placement init;
  try {
    init = stretched_tree(ht);
  } catch (const Error&) {
    // The stretched construction failed; look for any feasible point before
    // declaring the hanging type infeasible.
    std::optional<Placement> restored = restore_feasibility(ht, midpoint_placement(ht));
    for (std::uint64_t k = 1; !restored && k <= 3; ++k)
      restored = restore_feasibility(
          ht, jittered(midpoint_placement(ht), ht, options.seed + k, 0.3));
    if (!restored) {
      Solution sol;
      sol.status = SolveStatus::Infeasible;
      return sol;
    }
    init = *restored;
  }
  return minimize(ht, init, options);
}

std::pair<Placement, Eigen::VectorXd> solve_relaxation(const HangingType& ht,
                                                       const Placement& init,
                                                       const SolveOptions& options) {
  ht.validate();
  Model m(ht);
  BarrierResult br = solve_barrier(m, init.flat(), options.max_iterations);
  if (!br.converged)
    throw Error(ErrorCode::NonConvergence, "relaxation barrier hit the iteration cap");
  return {Placement::from_flat(br.beta, m.nv, m.n), br.z};
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

namespace {

struct OracleState {
  std::shared_ptr<const HangingType> ht;
  std::vector<int> param_vertices;  // non-root inner vertices, children first
  std::vector<Point> positions;
  std::vector<double> heights;
  long feasible = 0;
};

Point perp2(const Point& v) {
  Point p(2);
  p << -v[1], v[0];
  return p;
}

double tree_length(const OracleState& st) {
  const TreeTopology& t = st.ht->topology;
  double total = 0.0;
  for (const auto& e : t.edges)
    total += (st.positions[static_cast<size_t>(e.parent)] -
              st.positions[static_cast<size_t>(e.child)])
                 .norm();
  return total;
}

Placement capture(const OracleState& st) {
  Placement p;
  const int nv = st.ht->topology.inner_count();
  p.inner.assign(st.positions.begin(), st.positions.begin() + nv);
  return p;
}

void oracle_rec(OracleState& st, const OracleGrid& grid,
                const std::vector<std::vector<double>>& offsets, size_t k,
                const std::function<void(const std::vector<double>&, double,
                                         const OracleState&)>& visit,
                std::vector<double>& current) {
  const TreeTopology& t = st.ht->topology;
  if (k == st.param_vertices.size()) {
    const int root = t.root;
    const int a = t.left_child(root);
    const int b = t.right_child(root);
    const Point& pa = st.positions[static_cast<size_t>(a)];
    const Point& pb = st.positions[static_cast<size_t>(b)];
    const double ha = st.heights[static_cast<size_t>(a)];
    const double hb = st.heights[static_cast<size_t>(b)];
    if ((pa - pb).norm() == 0.0) {
      if (ha != hb) return;
      st.positions[static_cast<size_t>(root)] = pa;
    } else {
      if (!sibling_existence_check(pa, pb, ha, hb)) return;
      st.positions[static_cast<size_t>(root)] = root_on_segment(pa, pb, ha, hb);
    }
    ++st.feasible;
    visit(current, tree_length(st), st);

    if (grid.root_offsets > 0 && (pa - pb).norm() > 0.0) {
      HyperboloidSheet sheet = hyperboloid_sheet(pa, pb, ha, hb);
      const Point transverse = perp2(sheet.axis);
      for (int s = 1; s <= grid.root_offsets; ++s) {
        const double rho = grid.range * s / grid.root_offsets;
        for (double sign : {1.0, -1.0}) {
          st.positions[static_cast<size_t>(root)] = sheet.point_at_offset(sign * rho, transverse);
          ++st.feasible;
          visit(current, tree_length(st), st);
        }
      }
    }
    return;
  }

  const int v = st.param_vertices[k];
  const int a = t.left_child(v);
  const int b = t.right_child(v);
  const Point& pa = st.positions[static_cast<size_t>(a)];
  const Point& pb = st.positions[static_cast<size_t>(b)];
  const double ha = st.heights[static_cast<size_t>(a)];
  const double hb = st.heights[static_cast<size_t>(b)];

  if ((pa - pb).norm() == 0.0) {
    if (ha != hb) return;
    st.positions[static_cast<size_t>(v)] = pa;
    st.heights[static_cast<size_t>(v)] = ha;
    current.push_back(0.0);
    oracle_rec(st, grid, offsets, k + 1, visit, current);
    current.pop_back();
    return;
  }
  if (!sibling_existence_check(pa, pb, ha, hb)) return;
  HyperboloidSheet sheet = hyperboloid_sheet(pa, pb, ha, hb);
  const Point transverse = perp2(sheet.axis);
  for (double rho : offsets[k]) {
    if (sheet.collapsed && rho < 0.0) continue;  // the half line is one-sided
    const Point p = sheet.point_at_offset(rho, transverse);
    st.positions[static_cast<size_t>(v)] = p;
    st.heights[static_cast<size_t>(v)] = std::max((p - pa).norm() + ha, (p - pb).norm() + hb);
    current.push_back(rho);
    oracle_rec(st, grid, offsets, k + 1, visit, current);
    current.pop_back();
  }
}

OracleState make_oracle_state(const std::shared_ptr<const HangingType>& ht) {
  ht->validate();
  if (ht->dim != 2)
    throw Error(ErrorCode::DimensionUnsupported, "the brute-force oracle is planar only");
  if (ht->topology.leaf_count > 4)
    throw Error(ErrorCode::DimensionUnsupported,
                "the brute-force oracle supports at most four leaves");
  OracleState st;
  st.ht = ht;
  const TreeTopology& t = ht->topology;
  for (int v : t.inner_postorder())
    if (v != t.root) st.param_vertices.push_back(v);
  st.positions.resize(static_cast<size_t>(t.vertex_count()));
  st.heights.assign(static_cast<size_t>(t.vertex_count()), 0.0);
  for (int v = t.inner_count(); v < t.vertex_count(); ++v)
    st.positions[static_cast<size_t>(v)] = ht->leaf_position(v);
  return st;
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    out[static_cast<size_t>(i)] = lo + (hi - lo) * i / std::max(1, count - 1);
  return out;
}

}  // namespace

OracleSolution brute_force_oracle(const HangingType& ht, const OracleGrid& grid) {
  auto shared = std::make_shared<const HangingType>(ht);
  OracleState st = make_oracle_state(shared);
  const size_t nparams = st.param_vertices.size();

  std::vector<std::vector<double>> offsets(nparams,
                                           linspace(-grid.range, grid.range, grid.points));
  OracleSolution best;
  best.length = std::numeric_limits<double>::infinity();
  std::vector<double> best_params(nparams, 0.0);
  bool found = false;

  OracleGrid pass = grid;
  pass.root_offsets = 0;
  double step = nparams ? 2.0 * grid.range / std::max(1, grid.points - 1) : 0.0;
  for (int round = 0; round <= grid.refine_rounds; ++round) {
    std::vector<double> current;
    auto visit = [&](const std::vector<double>& params, double length, const OracleState& state) {
      if (length < best.length) {
        best.length = length;
        best.placement = capture(state);
        best_params.assign(params.begin(), params.end());
        found = true;
      }
    };
    oracle_rec(st, pass, offsets, 0, visit, current);
    if (!found) break;
    // Shrink every parameter range around the incumbent.
    for (size_t k = 0; k < nparams; ++k)
      offsets[k] = linspace(best_params[k] - 2.0 * step, best_params[k] + 2.0 * step, grid.points);
    step = 4.0 * step / std::max(1, grid.points - 1);
  }

  best.feasible_count = st.feasible;
  if (!found) throw Error(ErrorCode::EmptyFeasibleGrid, "no feasible point on the sampled grid");
  return best;
}

void oracle_enumerate(const HangingType& ht, const OracleGrid& grid,
                      const std::function<void(double, const Placement&)>& visit) {
  auto shared = std::make_shared<const HangingType>(ht);
  OracleState st = make_oracle_state(shared);
  std::vector<std::vector<double>> offsets(st.param_vertices.size(),
                                           linspace(-grid.range, grid.range, grid.points));
  std::vector<double> current;
  auto inner_visit = [&](const std::vector<double>&, double length, const OracleState& state) {
    visit(length, capture(state));
  };
  oracle_rec(st, grid, offsets, 0, inner_visit, current);
}

}  // namespace ledtree
