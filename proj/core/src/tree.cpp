#include "ledtree/tree.hpp"

#include <algorithm>
#include <cmath>

namespace ledtree {

std::vector<int> TreeTopology::inner_postorder() const {
  std::vector<int> order;
  order.reserve(static_cast<size_t>(inner_count()));
  std::vector<std::pair<int, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [v, expanded] = stack.back();
    stack.pop_back();
    if (is_leaf(v)) continue;
    if (expanded) {
      order.push_back(v);
    } else {
      stack.emplace_back(v, true);
      stack.emplace_back(children[static_cast<size_t>(v)][0], false);
      stack.emplace_back(children[static_cast<size_t>(v)][1], false);
    }
  }
  return order;
}

std::vector<int> TreeTopology::leaves_below(int v) const {
  std::vector<int> result;
  std::vector<int> stack{v};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    if (is_leaf(u)) {
      result.push_back(u);
    } else {
      stack.push_back(children[static_cast<size_t>(u)][0]);
      stack.push_back(children[static_cast<size_t>(u)][1]);
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

TreeTopology build_topology(const std::vector<std::array<int, 3>>& child_pairs,
                            int leaf_count) {
  if (leaf_count < 2)
    throw Error(ErrorCode::IndexRangeViolation, "at least two leaves required");

  TreeTopology t;
  t.leaf_count = leaf_count;
  const int nv = t.inner_count();
  const int nt = t.vertex_count();

  if (static_cast<int>(child_pairs.size()) != nv)
    throw Error(ErrorCode::NotFullBinary,
                "expected " + std::to_string(nv) + " inner vertices, got " +
                    std::to_string(child_pairs.size()));

  t.children.assign(static_cast<size_t>(nv), {-1, -1});
  t.parent.assign(static_cast<size_t>(nt), -1);
  std::vector<bool> defined(static_cast<size_t>(nv), false);

  for (const auto& [inner, a, b] : child_pairs) {
    if (inner < 0 || inner >= nv)
      throw Error(ErrorCode::IndexRangeViolation,
                  "inner vertex index " + std::to_string(inner) + " out of range", inner);
    if (defined[static_cast<size_t>(inner)])
      throw Error(ErrorCode::IndexRangeViolation,
                  "inner vertex " + std::to_string(inner) + " defined twice", inner);
    defined[static_cast<size_t>(inner)] = true;
    if (a < 0 || b < 0)
      throw Error(ErrorCode::NotFullBinary,
                  "inner vertex " + std::to_string(inner) + " has a missing child", inner);
    if (a == b)
      throw Error(ErrorCode::NotFullBinary,
                  "inner vertex " + std::to_string(inner) + " has one distinct child", inner);
    if (a >= nt || b >= nt)
      throw Error(ErrorCode::IndexRangeViolation,
                  "child index out of range at inner vertex " + std::to_string(inner), inner);
    const int left = std::min(a, b);
    const int right = std::max(a, b);
    t.children[static_cast<size_t>(inner)] = {left, right};
    for (int c : {left, right}) {
      if (c == inner)
        throw Error(ErrorCode::CyclicStructure,
                    "vertex " + std::to_string(inner) + " is its own child", inner);
      if (t.parent[static_cast<size_t>(c)] != -1)
        throw Error(ErrorCode::CyclicStructure,
                    "vertex " + std::to_string(c) + " has two parents", c);
      t.parent[static_cast<size_t>(c)] = inner;
    }
  }

  t.root = -1;
  for (int i = 0; i < nv; ++i) {
    if (t.parent[static_cast<size_t>(i)] == -1) {
      if (t.root != -1)
        throw Error(ErrorCode::CyclicStructure, "multiple parentless inner vertices");
      t.root = i;
    }
  }
  if (t.root == -1)
    throw Error(ErrorCode::CyclicStructure, "no root: parent links form a cycle");

  // Reachability from the root must cover every vertex.
  std::vector<bool> seen(static_cast<size_t>(nt), false);
  std::vector<int> stack{t.root};
  int count = 0;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (seen[static_cast<size_t>(v)]) continue;
    seen[static_cast<size_t>(v)] = true;
    ++count;
    if (!t.is_leaf(v)) {
      stack.push_back(t.children[static_cast<size_t>(v)][0]);
      stack.push_back(t.children[static_cast<size_t>(v)][1]);
    }
  }
  if (count != nt)
    throw Error(ErrorCode::CyclicStructure, "tree is not connected");

  t.edges.assign(static_cast<size_t>(t.edge_count()), {});
  for (int v = 0; v < nt; ++v) {
    if (v == t.root) continue;
    t.edges[static_cast<size_t>(t.edge_to_parent(v))] = {t.parent[static_cast<size_t>(v)], v};
  }

  auto sets = leaf_path_index_sets(t);
  t.left_path_edges.resize(static_cast<size_t>(nv));
  t.right_path_edges.resize(static_cast<size_t>(nv));
  for (int i = 0; i < nv; ++i) {
    t.left_path_edges[static_cast<size_t>(i)] = std::move(sets[static_cast<size_t>(i)].first);
    t.right_path_edges[static_cast<size_t>(i)] = std::move(sets[static_cast<size_t>(i)].second);
  }
  return t;
}

std::vector<std::pair<std::vector<int>, std::vector<int>>> leaf_path_index_sets(
    const TreeTopology& t) {
  std::vector<std::pair<std::vector<int>, std::vector<int>>> sets(
      static_cast<size_t>(t.inner_count()));
  auto walk_left_from = [&t](int start_child, std::vector<int>& out) {
    int v = start_child;
    out.push_back(t.edge_to_parent(v));
    while (!t.is_leaf(v)) {
      v = t.left_child(v);
      out.push_back(t.edge_to_parent(v));
    }
  };
  for (int i = 0; i < t.inner_count(); ++i) {
    walk_left_from(t.left_child(i), sets[static_cast<size_t>(i)].first);
    walk_left_from(t.right_child(i), sets[static_cast<size_t>(i)].second);
  }
  return sets;
}

void HangingType::validate() const {
  if (dim < 1) throw Error(ErrorCode::DimensionMismatch, "ambient dimension must be >= 1");
  if (static_cast<int>(leaf_coords.size()) != topology.leaf_count)
    throw Error(ErrorCode::DimensionMismatch, "every leaf needs coordinates");
  for (const auto& p : leaf_coords) {
    if (p.size() != dim)
      throw Error(ErrorCode::DimensionMismatch, "leaf coordinate dimension mismatch");
    if (!p.allFinite())
      throw Error(ErrorCode::DimensionMismatch, "leaf coordinates must be finite");
  }
}

Placement Placement::zeros(int inner_count, int dim) {
  Placement p;
  p.inner.assign(static_cast<size_t>(inner_count), Point::Zero(dim));
  return p;
}

Eigen::VectorXd Placement::flat() const {
  if (inner.empty()) return {};
  const int n = static_cast<int>(inner.front().size());
  Eigen::VectorXd v(static_cast<Eigen::Index>(inner.size()) * n);
  for (size_t i = 0; i < inner.size(); ++i) v.segment(static_cast<Eigen::Index>(i) * n, n) = inner[i];
  return v;
}

Placement Placement::from_flat(const Eigen::VectorXd& v, int inner_count, int dim) {
  Placement p;
  p.inner.resize(static_cast<size_t>(inner_count));
  for (int i = 0; i < inner_count; ++i) p.inner[static_cast<size_t>(i)] = v.segment(i * dim, dim);
  return p;
}

Point LedTreeInstance::unit_from(int neighbor, int v) const {
  Point d = position(v) - position(neighbor);
  const double norm = d.norm();
  if (norm <= 0.0)
    throw Error(ErrorCode::NotRegular,
                "zero-length edge between vertices " + std::to_string(neighbor) + " and " +
                    std::to_string(v));
  return d / norm;
}

Point LedTreeInstance::u_left(int i) const { return unit_from(topology().left_child(i), i); }
Point LedTreeInstance::u_right(int i) const { return unit_from(topology().right_child(i), i); }

Point LedTreeInstance::u_parent(int i) const {
  const int p = topology().parent[static_cast<size_t>(i)];
  if (p < 0) throw Error(ErrorCode::IndexRangeViolation, "root has no parent");
  return unit_from(p, i);
}

LedTreeInstance evaluate(std::shared_ptr<const HangingType> ht, Placement placement) {
  ht->validate();
  const TreeTopology& t = ht->topology;
  if (static_cast<int>(placement.inner.size()) != t.inner_count())
    throw Error(ErrorCode::DimensionMismatch, "placement size does not match inner count");
  for (const auto& p : placement.inner)
    if (p.size() != ht->dim || !p.allFinite())
      throw Error(ErrorCode::DimensionMismatch, "inner coordinates must be finite points in R^n");

  LedTreeInstance inst;
  inst.ht_ = std::move(ht);
  inst.placement_ = std::move(placement);

  const int nt = t.vertex_count();
  inst.lengths_.resize(t.edge_count());
  for (int j = 0; j < t.edge_count(); ++j) {
    const auto& e = t.edges[static_cast<size_t>(j)];
    inst.lengths_[j] = (inst.position(e.parent) - inst.position(e.child)).norm();
  }
  inst.total_ = inst.lengths_.sum();

  // depths top-down
  inst.depth_.assign(static_cast<size_t>(nt), 0.0);
  std::vector<int> stack{t.root};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (t.is_leaf(v)) continue;
    for (int c : t.children[static_cast<size_t>(v)]) {
      inst.depth_[static_cast<size_t>(c)] =
          inst.depth_[static_cast<size_t>(v)] + inst.lengths_[t.edge_to_parent(c)];
      stack.push_back(c);
    }
  }

  // heights bottom-up
  inst.height_.assign(static_cast<size_t>(nt), 0.0);
  for (int v : t.inner_postorder()) {
    double h = 0.0;
    for (int c : t.children[static_cast<size_t>(v)])
      h = std::max(h, inst.lengths_[t.edge_to_parent(c)] + inst.height_[static_cast<size_t>(c)]);
    inst.height_[static_cast<size_t>(v)] = h;
  }
  return inst;
}

LedTreeInstance evaluate(const HangingType& ht, const Placement& placement) {
  return evaluate(std::make_shared<const HangingType>(ht), placement);
}

Eigen::VectorXd led_residuals(const LedTreeInstance& inst) {
  const TreeTopology& t = inst.topology();
  Eigen::VectorXd r(t.inner_count());
  for (int i = 0; i < t.inner_count(); ++i) {
    double left = 0.0, right = 0.0;
    for (int j : t.left_path_edges[static_cast<size_t>(i)]) left += inst.edge_length(j);
    for (int j : t.right_path_edges[static_cast<size_t>(i)]) right += inst.edge_length(j);
    r[i] = left - right;
  }
  return r;
}

bool is_feasible(const LedTreeInstance& inst) {
  return led_residuals(inst).cwiseAbs().maxCoeff() <= inst.feasibility_tolerance();
}

}  // namespace ledtree
