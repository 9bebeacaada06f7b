#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ledtree/certificate.hpp"
#include "ledtree/feasible_set.hpp"
#include "ledtree/solver.hpp"
#include "support/fixtures.hpp"

using namespace ledtree;
using namespace ledtree::testsupport;

namespace {

LedTreeInstance certified_instance(const HangingType& ht) {
  SolveOptions opt;
  opt.restarts = 3;
  Solution s = minimize(ht, opt);
  REQUIRE(s.status == SolveStatus::CertifiedOptimal);
  return evaluate(ht, s.placement);
}

}  // namespace

TEST_CASE("dual recovery: triangle optimum has unit multipliers") {
  LedTreeInstance inst = certified_instance(isosceles_triangle());
  DualCertificate cert = recover_duals(inst);
  for (int j = 0; j < cert.y.size(); ++j) CHECK(cert.y[j] == doctest::Approx(1.0).epsilon(1e-8));
  for (int i = 0; i < cert.x.size(); ++i) CHECK(std::abs(cert.x[i]) < 1e-8);
  CHECK(cert.vertex_equation_defect.maxCoeff() < 1e-8);
}

TEST_CASE("dual recovery: square optimum has unit multipliers and zero x") {
  LedTreeInstance inst = certified_instance(unit_square());
  DualCertificate cert = recover_duals(inst);
  for (int j = 0; j < cert.y.size(); ++j) CHECK(cert.y[j] == doctest::Approx(1.0).epsilon(1e-8));
  for (int i = 0; i < cert.x.size(); ++i) CHECK(std::abs(cert.x[i]) < 1e-8);
}

TEST_CASE("dual recovery: two-leaf tree is trivially certified") {
  HangingType ht = two_leaf(pt(-1, 0), pt(1, 0));
  Placement p = Placement::zeros(1, 2);
  LedTreeInstance inst = evaluate(ht, p);
  DualCertificate cert = recover_duals(inst);
  CHECK(cert.y[0] == doctest::Approx(1.0));
  CHECK(cert.y[1] == doctest::Approx(1.0));
  KktReport report = verify_kkt(inst, cert, 1e-6);
  CHECK(report.certified);
}

TEST_CASE("structural identities hold exactly by construction") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    HangingType ht = random_inferred_type(rng, 4 + static_cast<int>(rng() % 3), 2);
    // any regular feasible instance; stationarity is irrelevant here
    Placement p = perturbed_stretched_tree(ht, trial, 0.1);
    LedTreeInstance inst = evaluate(ht, p);
    RegularityReport reg = classify_regularity(inst);
    if (!reg.regular) continue;
    DualCertificate cert = recover_duals(inst);
    const TreeTopology& t = ht.topology;
    CHECK(cert.y[t.edge_to_parent(t.left_child(t.root))] +
              cert.y[t.edge_to_parent(t.right_child(t.root))] ==
          doctest::Approx(2.0).epsilon(1e-14));
    for (int i = 0; i < t.inner_count(); ++i) {
      CHECK(cert.y[t.edge_to_parent(t.right_child(i))] ==
            doctest::Approx(1.0 - cert.x[i]).epsilon(1e-12));
      if (i == t.root) continue;
      CHECK(cert.y[t.edge_to_parent(t.left_child(i))] +
                cert.y[t.edge_to_parent(t.right_child(i))] ==
            doctest::Approx(cert.y[t.edge_to_parent(i)] + 1.0).epsilon(1e-12));
    }
    KktReport report = verify_kkt(inst, cert, 1e-6);
    CHECK(report.stationarity_z.pass);
    CHECK(report.complementarity.pass);  // z = lambda makes y^T f vanish identically
  }
}

TEST_CASE("verify_kkt: suboptimal stretched tree fails stationarity") {
  HangingType ht = isosceles_triangle();
  Placement p = Placement::zeros(2, 2);
  p.inner[0] = pt(0, 0);        // X at the baseline midpoint (feasible, suboptimal)
  p.inner[1] = pt(0, 0.5);
  LedTreeInstance inst = evaluate(ht, p);
  REQUIRE(led_residuals(inst).cwiseAbs().maxCoeff() < 1e-12);
  DualCertificate cert = recover_duals(inst);
  KktReport report = verify_kkt(inst, cert, 1e-6);
  CHECK_FALSE(report.stationarity_beta.pass);
  CHECK_FALSE(report.certified);
}

TEST_CASE("recover_duals rejects irregular instances") {
  HangingType ht = isosceles_triangle();
  Placement p = Placement::zeros(2, 2);
  p.inner[0] = pt(0, 0.75);
  p.inner[1] = pt(0, 0.75);  // zero-length root edge
  LedTreeInstance inst = evaluate(ht, p);
  CHECK_THROWS_AS(recover_duals(inst), Error);
}

TEST_CASE("geometric checks: triangle optimum sits at the angle bound") {
  LedTreeInstance inst = certified_instance(isosceles_triangle());
  GeometricReport g = geometric_checks(inst, 1e-6);
  CHECK(g.root_collinearity_defect < 1e-8);
  // the X fork opens exactly 2*pi/3 at the optimum
  CHECK(g.min_root_child_angle == doctest::Approx(2.0 * M_PI / 3.0).epsilon(1e-8));
  CHECK(g.min_root_child_angle >= 2.0 * M_PI / 3.0 - 1e-8);
  for (const auto& v : g.vertices) {
    if (v.is_root || !v.properly_forked) continue;
    CHECK(v.cone_interior);
  }
}

TEST_CASE("geometric checks: certified 3D instances are locally planar") {
  std::mt19937_64 rng(4242);
  int certified = 0;
  for (int trial = 0; trial < 20 && certified < 4; ++trial) {
    HangingType ht = random_inferred_type(rng, 5, 3);
    SolveOptions opt;
    opt.restarts = 3;
    Solution s = minimize(ht, opt);
    if (s.status != SolveStatus::CertifiedOptimal) continue;
    ++certified;
    GeometricReport g = geometric_checks(evaluate(ht, s.placement), 1e-6);
    CHECK(g.max_coplanarity_defect < 1e-6);
    CHECK(g.root_collinearity_defect < 1e-6);
    CHECK(g.min_root_child_angle >= 2.0 * M_PI / 3.0 - 1e-8);
  }
  CHECK(certified >= 3);
}

TEST_CASE("geometric checks: stretched trees are collinear by construction") {
  HangingType ht = four_leaf_balanced(pt(-1, 1), pt(-1, -1), pt(1, 0.7), pt(1, -1.1));
  LedTreeInstance inst = evaluate(ht, stretched_tree(ht));
  GeometricReport g = geometric_checks(inst, 1e-6);
  // every inner vertex lies on its children's segment
  for (const auto& v : g.vertices) {
    if (!v.directions_defined) continue;
    CHECK(v.antiparallel_lr < 1e-9);
  }
  // yet the stretched tree is generally not certified
  DualCertificate cert = recover_duals(inst);
  KktReport report = verify_kkt(inst, cert, 1e-6);
  CHECK_FALSE(report.certified);
}

TEST_CASE("positivity and angle monotonicity at certified optima") {
  std::mt19937_64 rng(9001);
  int certified = 0;
  for (int trial = 0; trial < 20 && certified < 8; ++trial) {
    HangingType ht = random_inferred_type(rng, 4 + static_cast<int>(rng() % 3), 2);
    SolveOptions opt;
    opt.restarts = 3;
    Solution s = minimize(ht, opt);
    if (s.status != SolveStatus::CertifiedOptimal) continue;
    ++certified;
    LedTreeInstance inst = evaluate(ht, s.placement);
    DualCertificate cert = recover_duals(inst);
    CHECK(cert.y.minCoeff() > 0.0);

    // angle(w, -uU) < angle(w, uR) with w = uL + uR, per properly forked vertex
    const TreeTopology& t = ht.topology;
    for (int i = 0; i < t.inner_count(); ++i) {
      if (i == t.root) continue;
      Point uL = inst.u_left(i);
      Point uR = inst.u_right(i);
      Point uU = inst.u_parent(i);
      const double sep = std::min({(uL - uR).norm(), (uL - uU).norm(), (uR - uU).norm()});
      if (sep < 1e-6) continue;
      Point w = uL + uR;
      const double theta = std::acos(std::clamp(w.dot(-uU) / w.norm(), -1.0, 1.0));
      const double rho = std::acos(std::clamp(w.dot(uR) / w.norm(), -1.0, 1.0));
      CHECK(theta < rho + 1e-9);
    }
  }
  CHECK(certified >= 5);
}
