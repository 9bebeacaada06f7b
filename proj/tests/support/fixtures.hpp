#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "ledtree/phylo.hpp"
#include "ledtree/solver.hpp"
#include "ledtree/tree.hpp"

namespace ledtree::testsupport {

inline Point pt(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

inline Point pt3(double x, double y, double z) {
  Point p(3);
  p << x, y, z;
  return p;
}

/// Two leaves below one root.
inline HangingType two_leaf(const Point& a, const Point& b) {
  HangingType ht;
  ht.topology = build_topology({{0, 1, 2}}, 2);
  ht.dim = static_cast<int>(a.size());
  ht.leaf_coords = {a, b};
  return ht;
}

/// ((A,B),C): inner 0 is the parent of leaves A=2, B=3; inner 1 is the root
/// with children 0 and C=4.
inline HangingType three_leaf(const Point& a, const Point& b, const Point& c) {
  HangingType ht;
  ht.topology = build_topology({{0, 2, 3}, {1, 0, 4}}, 3);
  ht.dim = static_cast<int>(a.size());
  ht.leaf_coords = {a, b, c};
  return ht;
}

/// ((A,B),(C,D)) balanced: inner 0 = parent(A=3, B=4), inner 1 =
/// parent(C=5, D=6), inner 2 = root.
inline HangingType four_leaf_balanced(const Point& a, const Point& b, const Point& c,
                                      const Point& d) {
  HangingType ht;
  ht.topology = build_topology({{0, 3, 4}, {1, 5, 6}, {2, 0, 1}}, 4);
  ht.dim = static_cast<int>(a.size());
  ht.leaf_coords = {a, b, c, d};
  return ht;
}

/// (((A,B),C),D) caterpillar: inner 0 = parent(A=3, B=4), inner 1 =
/// parent(0, C=5), inner 2 = root with children 1 and D=6.
inline HangingType four_leaf_caterpillar(const Point& a, const Point& b, const Point& c,
                                         const Point& d) {
  HangingType ht;
  ht.topology = build_topology({{0, 3, 4}, {1, 0, 5}, {2, 1, 6}}, 4);
  ht.dim = static_cast<int>(a.size());
  ht.leaf_coords = {a, b, c, d};
  return ht;
}

inline HangingType isosceles_triangle() {
  return three_leaf(pt(-1, 0), pt(1, 0), pt(0, 2));
}

inline HangingType unit_square() {
  return four_leaf_balanced(pt(-1, 1), pt(-1, -1), pt(1, 1), pt(1, -1));
}

inline HangingType collinear_infeasible() {
  return three_leaf(pt(-2, 0), pt(2, 0), pt(1, 0));
}

/// Random leaves in [-1,1]^dim with the agglomerative topology; generally a
/// certifiable hanging type. Redraws the points when inference fails.
inline HangingType random_inferred_type(std::mt19937_64& rng, int leaves, int dim,
                                        double spread = 1.0) {
  std::uniform_real_distribution<double> uni(-spread, spread);
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<Point> pts;
    std::vector<std::string> labels;
    for (int i = 0; i < leaves; ++i) {
      Point p(dim);
      for (int k = 0; k < dim; ++k) p[k] = uni(rng);
      pts.push_back(p);
      labels.push_back("L" + std::to_string(i));
    }
    try {
      return infer_hanging_type(pts, labels, 10).hanging_type;
    } catch (const Error&) {
      continue;
    }
  }
  throw Error(ErrorCode::TopologyInferenceFailed, "no inferable random instance in 64 draws");
}

/// Fitted log-log slope of residual-vs-delta; the first-order-exactness
/// tests require it to be close to 2.
inline double fitted_exponent(const std::vector<double>& deltas,
                              const std::vector<double>& values) {
  const size_t n = deltas.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = 0; k < n; ++k) {
    const double x = std::log10(deltas[k]);
    const double y = std::log10(std::max(values[k], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Haar-ish random rotation via QR of a Gaussian matrix.
inline Eigen::MatrixXd random_rotation(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd A(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) A(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ();
  if (Q.determinant() < 0) Q.col(0) = -Q.col(0);
  return Q;
}

inline HangingType transformed(const HangingType& ht, const Eigen::MatrixXd& rot,
                               const Point& shift, double scale) {
  HangingType out = ht;
  for (auto& p : out.leaf_coords) p = scale * (rot * p) + shift;
  return out;
}

}  // namespace ledtree::testsupport
