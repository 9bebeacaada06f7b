#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ledtree/phylo.hpp"
#include "ledtree/solver.hpp"
#include "support/fixtures.hpp"

using namespace ledtree;
using namespace ledtree::testsupport;

namespace {

// Slovak / Italian / Lithuanian over night / sky / fire: night is one shared
// group, sky splits three ways, fire pairs Slovak with Lithuanian.
CognateTable toy_table() {
  CognateTable t;
  t.meanings = {"night", "sky", "fire"};
  t.languages = {"SK", "IT", "LT"};
  t.cells = {
      {"nokt", "nokt", "nokt"},
      {"obloha", "cielo", "dangus"},
      {"ogn", "fok", "ogn"},
  };
  return t;
}

}  // namespace

TEST_CASE("binary embedding reproduces the fixture coordinates") {
  FeatureEmbedding emb = embed_cognates(toy_table(), CognateWeighting::Binary);
  REQUIRE(emb.coords.rows() == 3);
  REQUIRE(emb.coords.cols() == 6);
  Eigen::MatrixXd expect(3, 6);
  expect << 1, 1, 0, 0, 1, 0,   // SK
            1, 0, 1, 0, 0, 1,   // IT
            1, 0, 0, 1, 1, 0;   // LT
  CHECK((emb.coords - expect).cwiseAbs().maxCoeff() == 0.0);
  CHECK(emb.c_max == 3);
}

TEST_CASE("quartic weighting raises rare-group coordinates") {
  FeatureEmbedding emb = embed_cognates(toy_table(), CognateWeighting::Quartic);
  // c_max = 3 (sky): night c=1 -> 81, sky c=3 -> 1, fire c=2 -> 16
  CHECK(emb.coords(0, 0) == doctest::Approx(81.0));
  CHECK(emb.coords(1, 2) == doctest::Approx(1.0));
  CHECK(emb.coords(0, 4) == doctest::Approx(16.0));
  CHECK(emb.coords(2, 4) == doctest::Approx(16.0));
  CHECK(emb.coords(1, 5) == doctest::Approx(16.0));
  CHECK(emb.coords(0, 5) == 0.0);
}

TEST_CASE("single language embeds as an all-ones row") {
  CognateTable t;
  t.meanings = {"night", "sky"};
  t.languages = {"solo"};
  t.cells = {{"a"}, {"b"}};
  FeatureEmbedding emb = embed_cognates(t, CognateWeighting::Binary);
  REQUIRE(emb.coords.rows() == 1);
  REQUIRE(emb.coords.cols() == 2);
  CHECK(emb.coords.minCoeff() == 1.0);
}

TEST_CASE("embedding rejects empty and all-missing input") {
  CognateTable empty;
  CHECK_THROWS_AS(embed_cognates(empty, CognateWeighting::Binary), Error);

  CognateTable missing = toy_table();
  for (auto& row : missing.cells) row[1] = "";
  try {
    embed_cognates(missing, CognateWeighting::Binary);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllMissingRow);
  }
}

TEST_CASE("missing cells contribute no coordinate") {
  CognateTable t = toy_table();
  t.cells[2][2] = "";  // Lithuanian fire missing
  FeatureEmbedding emb = embed_cognates(t, CognateWeighting::Binary);
  // fire now has groups {ogn(SK), fok(IT)}; LT row has zeros there
  REQUIRE(emb.coords.cols() == 6);
  CHECK(emb.coords(2, 4) == 0.0);
  CHECK(emb.coords(2, 5) == 0.0);
}

TEST_CASE("simplex re-embedding is isometric") {
  FeatureEmbedding emb = embed_cognates(toy_table(), CognateWeighting::Binary);
  ReembedResult re = simplex_reembed(emb);
  REQUIRE(re.points.size() == 3);
  CHECK(re.points[0].size() == 2);
  auto dist = [&](int i, int j) { return (re.points[i] - re.points[j]).norm(); };
  CHECK(dist(0, 1) == doctest::Approx(2.0).epsilon(1e-12));          // SK-IT
  CHECK(dist(0, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));  // SK-LT
  CHECK(dist(1, 2) == doctest::Approx(2.0).epsilon(1e-12));          // IT-LT
  CHECK_FALSE(re.has_coincident);
}

TEST_CASE("two languages re-embed on a line") {
  CognateTable t;
  t.meanings = {"night", "sky"};
  t.languages = {"A", "B"};
  t.cells = {{"x", "x"}, {"y", "z"}};
  FeatureEmbedding emb = embed_cognates(t, CognateWeighting::Binary);
  ReembedResult re = simplex_reembed(emb);
  REQUIRE(re.points[0].size() == 1);
  CHECK((re.points[0] - re.points[1]).norm() ==
        doctest::Approx((emb.coords.row(0) - emb.coords.row(1)).norm()).epsilon(1e-12));
}

TEST_CASE("duplicate languages stay coincident and are flagged") {
  CognateTable t = toy_table();
  t.languages.push_back("SK2");
  for (auto& row : t.cells) row.push_back(row[0]);
  FeatureEmbedding emb = embed_cognates(t, CognateWeighting::Binary);
  ReembedResult re = simplex_reembed(emb);
  CHECK(re.has_coincident);
  REQUIRE_FALSE(re.coincident_pairs.empty());
  auto [i, j] = re.coincident_pairs.front();
  CHECK((re.points[i] - re.points[j]).norm() < 1e-9);
}

TEST_CASE("random embeddings re-embed isometrically") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> groups(1, 4);
  for (int trial = 0; trial < 10; ++trial) {
    const int nl = 3 + static_cast<int>(rng() % 5);
    CognateTable t;
    t.languages.resize(static_cast<size_t>(nl));
    for (int l = 0; l < nl; ++l) t.languages[static_cast<size_t>(l)] = "L" + std::to_string(l);
    const int nm = 6;
    for (int m = 0; m < nm; ++m) {
      t.meanings.push_back("m" + std::to_string(m));
      std::vector<std::string> row(static_cast<size_t>(nl));
      for (int l = 0; l < nl; ++l) row[static_cast<size_t>(l)] = "g" + std::to_string(groups(rng));
      t.cells.push_back(std::move(row));
    }
    FeatureEmbedding emb = embed_cognates(t, CognateWeighting::Quartic);
    ReembedResult re = simplex_reembed(emb);
    const double scale = emb.coords.cwiseAbs().maxCoeff() + 1.0;
    for (int i = 0; i < nl; ++i)
      for (int j = i + 1; j < nl; ++j) {
        const double orig = (emb.coords.row(i) - emb.coords.row(j)).norm();
        const double re_d = (re.points[static_cast<size_t>(i)] -
                             re.points[static_cast<size_t>(j)]).norm();
        CHECK(std::abs(orig - re_d) <= 1e-9 * scale);
      }
  }
}

TEST_CASE("topology inference on the fixture triangle") {
  FeatureEmbedding emb = embed_cognates(toy_table(), CognateWeighting::Binary);
  ReembedResult re = simplex_reembed(emb);
  InferredType inf = infer_hanging_type(re.points, emb.languages);
  const TreeTopology& t = inf.hanging_type.topology;
  // SK (leaf 2) and LT (leaf 4) merge first; IT (leaf 3) joins at the root.
  const int sk = t.inner_count() + 0;
  const int it = t.inner_count() + 1;
  const int lt = t.inner_count() + 2;
  CHECK(t.parent[static_cast<size_t>(sk)] == t.parent[static_cast<size_t>(lt)]);
  CHECK(t.parent[static_cast<size_t>(it)] == t.root);
  // and the stretched placement is exactly feasible
  LedTreeInstance inst = evaluate(inf.hanging_type, inf.placement);
  CHECK(led_residuals(inst).cwiseAbs().maxCoeff() <= inst.feasibility_tolerance());
}

TEST_CASE("topology inference: two points meet at the midpoint") {
  std::vector<Point> pts = {pt(0, 0), pt(2, 0)};
  InferredType inf = infer_hanging_type(pts, {"a", "b"});
  CHECK(inf.placement.inner[0][0] == doctest::Approx(1.0));
  CHECK(inf.placement.inner[0][1] == doctest::Approx(0.0));
}

TEST_CASE("topology inference: square merges side pairs first") {
  std::vector<Point> pts = {pt(-1, 1), pt(-1, -1), pt(1, 1), pt(1, -1)};
  InferredType inf = infer_hanging_type(pts, {"a", "b", "c", "d"});
  const TreeTopology& t = inf.hanging_type.topology;
  const int a = t.inner_count() + 0, b = t.inner_count() + 1;
  const int c = t.inner_count() + 2, d = t.inner_count() + 3;
  CHECK(t.parent[static_cast<size_t>(a)] == t.parent[static_cast<size_t>(b)]);
  CHECK(t.parent[static_cast<size_t>(c)] == t.parent[static_cast<size_t>(d)]);
  LedTreeInstance inst = evaluate(inf.hanging_type, inf.placement);
  CHECK(led_residuals(inst).cwiseAbs().maxCoeff() <= inst.feasibility_tolerance());
}

TEST_CASE("agglomeration always returns a feasible stretched tree") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  int produced = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 6);
    std::vector<Point> pts;
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) {
      pts.push_back(pt(uni(rng), uni(rng)));
      labels.push_back("L" + std::to_string(i));
    }
    InferredType inf;
    try {
      inf = infer_hanging_type(pts, labels, 5);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TopologyInferenceFailed);
      continue;
    }
    ++produced;
    LedTreeInstance inst = evaluate(inf.hanging_type, inf.placement);
    CHECK(led_residuals(inst).cwiseAbs().maxCoeff() <= inst.feasibility_tolerance());
  }
  CHECK(produced >= 20);
}

TEST_CASE("permutation of the input points leaves lengths invariant") {
  std::vector<Point> pts = {pt(0, 0), pt(2.2, 0.3), pt(1.0, 1.7), pt(-0.4, 1.1)};
  std::vector<std::string> labels = {"a", "b", "c", "d"};
  InferredType base = infer_hanging_type(pts, labels);
  Solution sol_base = minimize(base.hanging_type, base.placement, {});

  std::vector<size_t> perm = {2, 0, 3, 1};
  std::vector<Point> pts2;
  std::vector<std::string> labels2;
  for (size_t k : perm) {
    pts2.push_back(pts[k]);
    labels2.push_back(labels[k]);
  }
  InferredType permuted = infer_hanging_type(pts2, labels2);
  Solution sol_perm = minimize(permuted.hanging_type, permuted.placement, {});
  CHECK(sol_base.length == doctest::Approx(sol_perm.length).epsilon(1e-9));
}

TEST_CASE("split dating scales linearly with the anchor age") {
  HangingType ht = isosceles_triangle();
  Solution s = minimize(ht);
  REQUIRE(s.status == SolveStatus::CertifiedOptimal);
  LedTreeInstance inst = evaluate(ht, s.placement);

  auto years1 = date_splits(inst, 0, 1000.0);
  auto years2 = date_splits(inst, 0, 3000.0);
  for (size_t v = 0; v < years1.size(); ++v)
    CHECK(years2[v] == doctest::Approx(3.0 * years1[v]).epsilon(1e-12));
  CHECK(years1[0] == doctest::Approx(1000.0));
  // leaves date to zero
  for (int v = ht.topology.inner_count(); v < ht.topology.vertex_count(); ++v)
    CHECK(years1[static_cast<size_t>(v)] == 0.0);
  // anchoring at the root dates the root to the anchor age
  auto years_root = date_splits(inst, ht.topology.root, 1550.0);
  CHECK(years_root[static_cast<size_t>(ht.topology.root)] == doctest::Approx(1550.0));
  CHECK(years_root[0] < 1550.0);
}

TEST_CASE("dating rejects a zero-height anchor") {
  HangingType ht = isosceles_triangle();
  Solution s = minimize(ht);
  LedTreeInstance inst = evaluate(ht, s.placement);
  const int leaf = ht.topology.inner_count();
  CHECK_THROWS_AS(date_splits(inst, leaf, 1000.0), Error);
}

TEST_CASE("lowest common ancestor") {
  // caterpillar (((A,B),C),D)
  HangingType ht = four_leaf_caterpillar(pt(-1, 0), pt(1, 0), pt(0, 3), pt(0, -4));
  const TreeTopology& t = ht.topology;
  CHECK(lowest_common_ancestor(t, {3, 4}) == 0);
  CHECK(lowest_common_ancestor(t, {3, 5}) == 1);
  CHECK(lowest_common_ancestor(t, {3, 6}) == t.root);
  CHECK(lowest_common_ancestor(t, {3}) == 3);
}
