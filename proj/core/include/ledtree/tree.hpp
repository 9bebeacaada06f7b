#pragma once

#include <Eigen/Core>
#include <array>
#include <memory>
#include <vector>

#include "ledtree/error.hpp"

namespace ledtree {

using Point = Eigen::VectorXd;

/// Rooted full-binary combinatorial tree.
///
/// Vertices are indexed with inner vertices first: inner indices occupy
/// [0, inner_count()), leaf indices [inner_count(), vertex_count()).
/// Every inner vertex stores its two children as (left, right) where the
/// left child is the one with the lower index. Edges are identified by
/// their child endpoint; edge ids are the child indices compacted over
/// the root gap, so they form [0, edge_count()).
struct TreeTopology {
  struct Edge {
    int parent = -1;
    int child = -1;
  };

  int leaf_count = 0;
  int root = -1;
  std::vector<std::array<int, 2>> children;  // per inner vertex {left, right}
  std::vector<int> parent;                   // per vertex, -1 at the root
  std::vector<Edge> edges;
  // Edge index sets of the left and right leaf path of each inner vertex:
  // the left path starts with the left child edge, the right path with the
  // right child edge, and both afterwards always continue through the left
  // child edge until a leaf is reached.
  std::vector<std::vector<int>> left_path_edges;
  std::vector<std::vector<int>> right_path_edges;

  int inner_count() const { return leaf_count - 1; }
  int vertex_count() const { return 2 * leaf_count - 1; }
  int edge_count() const { return 2 * (leaf_count - 1); }
  bool is_leaf(int v) const { return v >= inner_count(); }

  /// Edge id of the edge between `child` and its parent. `child` must not
  /// be the root.
  int edge_to_parent(int child) const { return child < root ? child : child - 1; }
  int left_child(int i) const { return children[i][0]; }
  int right_child(int i) const { return children[i][1]; }

  /// Inner vertices ordered so that children appear before their parent.
  std::vector<int> inner_postorder() const;
  /// All leaf indices below vertex v (v itself if it is a leaf).
  std::vector<int> leaves_below(int v) const;
};

/// Builds and validates a topology from (inner index, left child, right
/// child) triples. Children may be listed in any order; they are normalized
/// so that the left child has the lower index. A negative child index marks
/// a missing child and is rejected as NotFullBinary.
TreeTopology build_topology(const std::vector<std::array<int, 3>>& child_pairs,
                            int leaf_count);

/// Left/right leaf-path edge index sets for every inner vertex, as pairs
/// (I_left, I_right). The sets are also cached on the topology itself.
std::vector<std::pair<std::vector<int>, std::vector<int>>> leaf_path_index_sets(
    const TreeTopology& topology);

/// A topology hung by its leaves: leaf positions are fixed in R^dim, inner
/// vertices are free.
struct HangingType {
  TreeTopology topology;
  int dim = 0;
  std::vector<Point> leaf_coords;  // indexed by leaf offset (v - inner_count)

  const Point& leaf_position(int leaf_vertex) const {
    return leaf_coords[static_cast<size_t>(leaf_vertex - topology.inner_count())];
  }
  void validate() const;
};

/// Coordinates of the inner vertices; together with a HangingType this
/// determines a full Euclidean tree.
struct Placement {
  std::vector<Point> inner;

  static Placement zeros(int inner_count, int dim);
  Eigen::VectorXd flat() const;
  static Placement from_flat(const Eigen::VectorXd& v, int inner_count, int dim);
};

/// Residual tolerance used throughout: tol = kFeasTolScale * (1 + total
/// length), relative because lengths scale with leaf coordinates.
inline constexpr double kFeasTolScale = 1e-9;

/// A fully evaluated Euclidean tree: placement plus cached per-edge lengths,
/// per-vertex depths and heights, and the total length. Immutable after
/// construction; safe to share across threads.
class LedTreeInstance {
 public:
  LedTreeInstance() = default;

  const HangingType& hanging_type() const { return *ht_; }
  const std::shared_ptr<const HangingType>& hanging_type_ptr() const { return ht_; }
  const TreeTopology& topology() const { return ht_->topology; }
  const Placement& placement() const { return placement_; }
  int dim() const { return ht_->dim; }

  const Point& position(int v) const {
    return ht_->topology.is_leaf(v) ? ht_->leaf_position(v)
                                    : placement_.inner[static_cast<size_t>(v)];
  }
  double edge_length(int j) const { return lengths_[j]; }
  const Eigen::VectorXd& edge_lengths() const { return lengths_; }
  double total_length() const { return total_; }
  double depth(int v) const { return depth_[static_cast<size_t>(v)]; }
  double height(int v) const { return height_[static_cast<size_t>(v)]; }

  /// Unit vector from the left child toward inner vertex i (the gradient of
  /// that edge's length at v_i). Throws NotRegular on a zero-length edge.
  Point u_left(int i) const;
  Point u_right(int i) const;
  /// Unit vector from the parent toward vertex i; i must not be the root.
  Point u_parent(int i) const;

  double feasibility_tolerance() const { return kFeasTolScale * (1.0 + total_); }

 private:
  friend LedTreeInstance evaluate(std::shared_ptr<const HangingType>, Placement);

  Point unit_from(int neighbor, int v) const;

  std::shared_ptr<const HangingType> ht_;
  Placement placement_;
  Eigen::VectorXd lengths_;
  std::vector<double> depth_;
  std::vector<double> height_;
  double total_ = 0.0;
};

/// Evaluates a placement against a hanging type. The overload taking a
/// shared_ptr avoids copying the hanging type in tight loops.
LedTreeInstance evaluate(std::shared_ptr<const HangingType> ht, Placement placement);
LedTreeInstance evaluate(const HangingType& ht, const Placement& placement);

/// Component i is the length of the left leaf path of inner vertex i minus
/// the length of its right leaf path; the zero vector characterizes trees
/// whose leaves all have equal depth.
Eigen::VectorXd led_residuals(const LedTreeInstance& instance);

bool is_feasible(const LedTreeInstance& instance);

}  // namespace ledtree
