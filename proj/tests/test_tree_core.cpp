#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "ledtree/tree.hpp"
#include "support/fixtures.hpp"

using namespace ledtree;
using namespace ledtree::testsupport;

namespace {

// Independent path-walking oracle: enumerates the left/right leaf paths by
// following children directly, without touching the cached sets.
std::pair<std::set<int>, std::set<int>> leaf_path_oracle(const TreeTopology& t, int i) {
  auto walk = [&t](int first_child) {
    std::set<int> edges;
    int v = first_child;
    edges.insert(t.edge_to_parent(v));
    while (!t.is_leaf(v)) {
      v = t.left_child(v);
      edges.insert(t.edge_to_parent(v));
    }
    return edges;
  };
  return {walk(t.left_child(i)), walk(t.right_child(i))};
}

Placement random_placement(std::mt19937_64& rng, int inner, int dim, double spread) {
  std::uniform_real_distribution<double> uni(-spread, spread);
  Placement p = Placement::zeros(inner, dim);
  for (auto& v : p.inner)
    for (int k = 0; k < dim; ++k) v[k] = uni(rng);
  return p;
}

}  // namespace

TEST_CASE("vertex and edge counts") {
  // 8-leaf balanced topology built from explicit pairs
  std::vector<std::array<int, 3>> pairs = {{0, 7, 8},  {1, 9, 10}, {2, 11, 12}, {3, 13, 14},
                                           {4, 0, 1},  {5, 2, 3},  {6, 4, 5}};
  TreeTopology t = build_topology(pairs, 8);
  CHECK(t.inner_count() == 7);
  CHECK(t.vertex_count() == 15);
  CHECK(t.edge_count() == 14);
  CHECK(t.root == 6);

  TreeTopology two = build_topology({{0, 1, 2}}, 2);
  CHECK(two.inner_count() == 1);
  CHECK(two.edge_count() == 2);
}

TEST_CASE("count identities hold for generated topologies") {
  std::mt19937_64 rng(7);
  for (int nl : {2, 3, 5, 9, 16}) {
    HangingType ht = random_inferred_type(rng, nl, 2);
    const TreeTopology& t = ht.topology;
    CHECK(t.inner_count() == nl - 1);
    CHECK(t.vertex_count() == 2 * nl - 1);
    CHECK(t.edge_count() == 2 * (nl - 1));
    for (int i = 0; i < t.inner_count(); ++i) CHECK(t.left_child(i) < t.right_child(i));
  }
}

TEST_CASE("malformed topologies are rejected") {
  CHECK_THROWS_AS(build_topology({{0, 1, -1}}, 2), Error);          // one child
  CHECK_THROWS_AS(build_topology({{0, 1, 1}}, 2), Error);           // duplicate child
  CHECK_THROWS_AS(build_topology({{0, 0, 2}}, 2), Error);           // self child
  CHECK_THROWS_AS(build_topology({{0, 5, 6}}, 2), Error);           // out of range
  // two-parent vertex
  CHECK_THROWS_AS(build_topology({{0, 3, 4}, {1, 3, 5}, {2, 0, 1}}, 4), Error);
  try {
    build_topology({{0, 1, -1}}, 2);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotFullBinary);
  }
}

TEST_CASE("leaf path index sets on tiny trees") {
  SUBCASE("two leaves") {
    TreeTopology t = build_topology({{0, 1, 2}}, 2);
    CHECK(t.left_path_edges[0] == std::vector<int>{t.edge_to_parent(1)});
    CHECK(t.right_path_edges[0] == std::vector<int>{t.edge_to_parent(2)});
  }

  SUBCASE("three leaves, hand enumeration") {
    // X=0 parent of A=2, B=3; root=1 parent of X and C=4.
    TreeTopology t = build_topology({{0, 2, 3}, {1, 0, 4}}, 3);
    const int eX = t.edge_to_parent(0);
    const int eA = t.edge_to_parent(2);
    const int eB = t.edge_to_parent(3);
    const int eC = t.edge_to_parent(4);
    CHECK(t.left_path_edges[1] == std::vector<int>{eX, eA});
    CHECK(t.right_path_edges[1] == std::vector<int>{eC});
    CHECK(t.left_path_edges[0] == std::vector<int>{eA});
    CHECK(t.right_path_edges[0] == std::vector<int>{eB});
  }

  SUBCASE("four leaves balanced, disjointness and root union") {
    TreeTopology t = build_topology({{0, 3, 4}, {1, 5, 6}, {2, 0, 1}}, 4);
    for (int i = 0; i < t.inner_count(); ++i) {
      std::set<int> left(t.left_path_edges[i].begin(), t.left_path_edges[i].end());
      std::set<int> right(t.right_path_edges[i].begin(), t.right_path_edges[i].end());
      for (int j : right) CHECK(left.count(j) == 0);
    }
    // Root paths by the oracle: left = {root->0, 0->A}, right = {root->1, 1->C}.
    auto [oleft, oright] = leaf_path_oracle(t, 2);
    std::set<int> union_root = oleft;
    union_root.insert(oright.begin(), oright.end());
    CHECK(union_root.size() == 4);
    CHECK(std::set<int>(t.left_path_edges[2].begin(), t.left_path_edges[2].end()) == oleft);
    CHECK(std::set<int>(t.right_path_edges[2].begin(), t.right_path_edges[2].end()) == oright);
  }
}

TEST_CASE("leaf path sets match the path-walking oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    HangingType ht = random_inferred_type(rng, 3 + static_cast<int>(rng() % 8), 2);
    const TreeTopology& t = ht.topology;
    for (int i = 0; i < t.inner_count(); ++i) {
      auto [left, right] = leaf_path_oracle(t, i);
      CHECK(std::set<int>(t.left_path_edges[i].begin(), t.left_path_edges[i].end()) == left);
      CHECK(std::set<int>(t.right_path_edges[i].begin(), t.right_path_edges[i].end()) == right);
    }
  }
}

TEST_CASE("evaluate: symmetric two-leaf tree") {
  HangingType ht = two_leaf(pt(-1, 0), pt(1, 0));
  Placement p = Placement::zeros(1, 2);
  LedTreeInstance inst = evaluate(ht, p);
  CHECK(inst.total_length() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(inst.depth(1) == doctest::Approx(1.0));
  CHECK(inst.depth(2) == doctest::Approx(1.0));
  CHECK(led_residuals(inst).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("evaluate: three-leaf tree at the known optimum placement") {
  HangingType ht = isosceles_triangle();
  Placement p = Placement::zeros(2, 2);
  p.inner[0] = pt(0.0, 1.0 / std::sqrt(3.0));
  p.inner[1] = pt(0.0, 1.0 / std::sqrt(3.0) + (2.0 - std::sqrt(3.0)) / 2.0);
  LedTreeInstance inst = evaluate(ht, p);
  CHECK(inst.total_length() == doctest::Approx(2.0 + std::sqrt(3.0)).epsilon(1e-12));
  CHECK(led_residuals(inst).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("led residuals: hand-computed examples") {
  HangingType ht = three_leaf(pt(-1, 0), pt(1, 0), pt(0, 2));
  SUBCASE("feasible placement on the segment") {
    Placement p = Placement::zeros(2, 2);
    p.inner[0] = pt(0, 0);
    p.inner[1] = pt(0, 0.5);
    Eigen::VectorXd r = led_residuals(evaluate(ht, p));
    CHECK(std::abs(r[0]) < 1e-15);
    CHECK(std::abs(r[1]) < 1e-15);
  }
  SUBCASE("perturbed root gives residual 0.2") {
    Placement p = Placement::zeros(2, 2);
    p.inner[0] = pt(0, 0);
    p.inner[1] = pt(0, 0.6);
    Eigen::VectorXd r = led_residuals(evaluate(ht, p));
    CHECK(r[1] == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("evaluation is total even when infeasible") {
    Placement p = Placement::zeros(2, 2);
    p.inner[0] = pt(0.3, -0.2);
    p.inner[1] = pt(0.1, 0.9);
    LedTreeInstance inst = evaluate(ht, p);
    CHECK(inst.total_length() > 0.0);
    CHECK(led_residuals(inst).cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  HangingType ht = two_leaf(pt(-1, 0), pt(1, 0));
  Placement p = Placement::zeros(1, 3);
  CHECK_THROWS_AS(evaluate(ht, p), Error);
}

TEST_CASE("property: residuals vanish iff all leaf depths agree") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    HangingType ht = random_inferred_type(rng, 4 + static_cast<int>(rng() % 4), 2);
    const TreeTopology& t = ht.topology;

    // random placements: infeasible in general
    Placement p = random_placement(rng, t.inner_count(), 2, 1.5);
    LedTreeInstance inst = evaluate(ht, p);
    std::vector<double> depths;
    for (int v = t.inner_count(); v < t.vertex_count(); ++v) depths.push_back(inst.depth(v));
    const double depth_spread =
        *std::max_element(depths.begin(), depths.end()) -
        *std::min_element(depths.begin(), depths.end());
    const double residual = led_residuals(inst).cwiseAbs().maxCoeff();
    const double tol = inst.feasibility_tolerance();
    CHECK((residual <= tol) == (depth_spread <= 10 * tol));

    // stretched placements: exactly feasible
    LedTreeInstance feas = evaluate(ht, stretched_tree(ht));
    CHECK(led_residuals(feas).cwiseAbs().maxCoeff() <= feas.feasibility_tolerance());
    std::vector<double> fdepths;
    for (int v = t.inner_count(); v < t.vertex_count(); ++v) fdepths.push_back(feas.depth(v));
    CHECK(*std::max_element(fdepths.begin(), fdepths.end()) -
              *std::min_element(fdepths.begin(), fdepths.end()) <=
          10 * feas.feasibility_tolerance());
  }
}

TEST_CASE("property: recursive LED structure below every inner vertex") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    HangingType ht = random_inferred_type(rng, 5 + static_cast<int>(rng() % 4), 3);
    LedTreeInstance inst = evaluate(ht, stretched_tree(ht));
    const TreeTopology& t = ht.topology;
    for (int i = 0; i < t.inner_count(); ++i) {
      // every leaf below i sits at equal distance-below-i
      double lo = 1e300, hi = -1e300;
      for (int leaf : t.leaves_below(i)) {
        const double below = inst.depth(leaf) - inst.depth(i);
        lo = std::min(lo, below);
        hi = std::max(hi, below);
      }
      CHECK(hi - lo <= 100 * inst.feasibility_tolerance());
      CHECK(std::abs(hi - inst.height(i)) <= 100 * inst.feasibility_tolerance());
    }
  }
}

TEST_CASE("property: isometry equivariance and scaling of evaluation") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 2);
    HangingType ht = random_inferred_type(rng, 4 + static_cast<int>(rng() % 3), dim);
    Placement p = random_placement(rng, ht.topology.inner_count(), dim, 1.0);
    LedTreeInstance base = evaluate(ht, p);

    Eigen::MatrixXd Q = random_rotation(rng, dim);
    Point shift(dim);
    for (int k = 0; k < dim; ++k) shift[k] = 0.3 * static_cast<double>(k + 1);
    const double scale = 2.5;

    HangingType moved = transformed(ht, Q, shift, scale);
    Placement moved_p = p;
    for (auto& v : moved_p.inner) v = scale * (Q * v) + shift;
    LedTreeInstance mapped = evaluate(moved, moved_p);

    CHECK(mapped.total_length() ==
          doctest::Approx(scale * base.total_length()).epsilon(1e-10));
    for (int j = 0; j < ht.topology.edge_count(); ++j)
      CHECK(mapped.edge_length(j) == doctest::Approx(scale * base.edge_length(j)).epsilon(1e-9));
  }
}
