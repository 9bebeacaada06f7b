#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "ledtree/io.hpp"
#include "ledtree/svg.hpp"
#include "support/fixtures.hpp"

using namespace ledtree;
using namespace ledtree::testsupport;

namespace {
const std::string kDataDir = LEDTREE_DATA_DIR;
}

TEST_CASE("tree JSON round trip is bit exact") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    HangingType ht = random_inferred_type(rng, 4 + static_cast<int>(rng() % 4), 3);
    Placement p = perturbed_stretched_tree(ht, trial, 0.1);
    std::vector<std::string> labels;
    for (int k = 0; k < ht.topology.leaf_count; ++k) labels.push_back("leaf" + std::to_string(k));

    const std::string text = tree_json_string(ht, labels, &p);
    TreeDocument doc = parse_tree_json(text);
    REQUIRE(doc.placement.has_value());
    REQUIRE(doc.hanging_type.topology.leaf_count == ht.topology.leaf_count);
    for (int k = 0; k < ht.topology.leaf_count; ++k) {
      const Point& a = ht.leaf_coords[static_cast<size_t>(k)];
      const Point& b = doc.hanging_type.leaf_coords[static_cast<size_t>(k)];
      for (int d = 0; d < ht.dim; ++d) CHECK(a[d] == b[d]);  // exact, not approximate
    }
    for (size_t i = 0; i < p.inner.size(); ++i)
      for (int d = 0; d < ht.dim; ++d) CHECK(p.inner[i][d] == doc.placement->inner[i][d]);
    CHECK(doc.leaf_labels == labels);

    // serialization is deterministic
    CHECK(tree_json_string(doc.hanging_type, doc.leaf_labels, &*doc.placement) == text);
  }
}

TEST_CASE("tree JSON normalizes arbitrary vertex ids") {
  const std::string text = R"({
    "n": 2,
    "leaves": [
      {"id": 100, "label": "A", "coords": [-1.0, 0.0]},
      {"id": 200, "label": "B", "coords": [1.0, 0.0]},
      {"id": 300, "label": "C", "coords": [0.0, 2.0]}
    ],
    "inner": [
      {"id": 7, "left": 100, "right": 200},
      {"id": 9, "left": 7, "right": 300}
    ],
    "root": 9
  })";
  TreeDocument doc = parse_tree_json(text);
  CHECK(doc.hanging_type.topology.leaf_count == 3);
  CHECK(doc.hanging_type.topology.root == 1);
  CHECK(doc.leaf_labels[0] == "A");
  CHECK_FALSE(doc.placement.has_value());
}

TEST_CASE("malformed tree JSON raises input errors") {
  CHECK_THROWS_AS(parse_tree_json("{not json"), Error);
  CHECK_THROWS_AS(parse_tree_json("{}"), Error);
  // inconsistent root
  const std::string bad_root = R"({
    "n": 2,
    "leaves": [
      {"id": 1, "label": "A", "coords": [-1.0, 0.0]},
      {"id": 2, "label": "B", "coords": [1.0, 0.0]}
    ],
    "inner": [{"id": 0, "left": 1, "right": 2}],
    "root": 1
  })";
  CHECK_THROWS_AS(parse_tree_json(bad_root), Error);
}

TEST_CASE("bundled fixture files parse") {
  TreeDocument tri = read_tree_json(kDataDir + "/isosceles.json");
  CHECK(tri.hanging_type.topology.leaf_count == 3);
  TreeDocument sq = read_tree_json(kDataDir + "/square.json");
  CHECK(sq.hanging_type.topology.leaf_count == 4);
  CognateTable toy = read_cognate_tsv(kDataDir + "/toy_cognates.tsv");
  CHECK(toy.language_count() == 3);
  CHECK(toy.meaning_count() == 3);
  CHECK(toy.languages == std::vector<std::string>{"SK", "IT", "LT"});
}

TEST_CASE("newick export carries lengths and escaped labels") {
  HangingType ht = three_leaf(pt(-1, 0), pt(1, 0), pt(0, 2));
  Placement p = Placement::zeros(2, 2);
  p.inner[0] = pt(0, 0);
  p.inner[1] = pt(0, 0.5);
  LedTreeInstance inst = evaluate(ht, p);
  std::string nwk = to_newick(inst, {"a b", "plain", "c:d"});
  CHECK(nwk == "(('a b':1,plain:1):0.5,'c:d':1.5);\n");
}

TEST_CASE("cognate TSV parsing handles missing cells") {
  const std::string text = "meaning\tX\tY\nnight\tn1\tn1\nsky\ts1\t\n";
  CognateTable t = parse_cognate_tsv(text);
  CHECK(t.language_count() == 2);
  CHECK(t.cells[1][1].empty());
  CHECK_THROWS_AS(parse_cognate_tsv("meaning\tX\n"), Error);
}

TEST_CASE("embedding JSON round trip") {
  CognateTable t = read_cognate_tsv(kDataDir + "/toy_cognates.tsv");
  FeatureEmbedding emb = embed_cognates(t, CognateWeighting::Quartic);
  FeatureEmbedding back = parse_embedding_json(embedding_json_string(emb));
  CHECK(back.languages == emb.languages);
  CHECK(back.c_max == emb.c_max);
  CHECK((back.coords - emb.coords).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solution JSON carries status and restart summaries") {
  HangingType ht = isosceles_triangle();
  SolveOptions opt;
  opt.restarts = 2;
  Solution s = minimize(ht, opt);
  const std::string text = solution_json_string(ht, {"A", "B", "C"}, s);
  CHECK(text.find("certified_optimal") != std::string::npos);
  CHECK(text.find("restarts") != std::string::npos);
  TreeDocument doc = parse_tree_or_solution_json(text);
  REQUIRE(doc.placement.has_value());
  LedTreeInstance inst = evaluate(doc.hanging_type, *doc.placement);
  CHECK(inst.total_length() == doctest::Approx(s.length).epsilon(1e-15));
  // identical input gives byte-identical output
  CHECK(solution_json_string(ht, {"A", "B", "C"}, s) == text);
}

TEST_CASE("SVG rendering smoke checks") {
  HangingType ht = unit_square();
  Solution s = minimize(ht);
  LedTreeInstance inst = evaluate(ht, s.placement);
  RenderSpec spec;
  std::string svg = render_svg(inst, {"A", "B", "C", "D"}, spec);
  CHECK(svg.find("<svg") == 0);
  // one square marker for the root, circles for the other six vertices
  size_t rects = 0, circles = 0, lines = 0, pos = 0;
  while ((pos = svg.find("<rect", pos)) != std::string::npos) { ++rects; pos += 5; }
  pos = 0;
  while ((pos = svg.find("<circle", pos)) != std::string::npos) { ++circles; pos += 7; }
  pos = 0;
  while ((pos = svg.find("<line", pos)) != std::string::npos) { ++lines; pos += 5; }
  CHECK(rects == 2);  // background + root marker
  CHECK(circles == 6);
  CHECK(lines == 6);

  // high-dimensional instances must be projected first
  std::mt19937_64 rng(3);
  HangingType ht4 = random_inferred_type(rng, 5, 4);
  Placement p4 = stretched_tree(ht4);
  LedTreeInstance inst4 = evaluate(ht4, p4);
  CHECK_THROWS_AS(render_svg(inst4, {}, spec), Error);
  LedTreeInstance flat = project_to_plane(inst4);
  CHECK(flat.dim() == 2);
  RenderSpec projected_spec;
  projected_spec.projected = true;
  std::string svg4 = render_svg(flat, {}, projected_spec);
  CHECK(svg4.find("projection") != std::string::npos);
}

TEST_CASE("PGM output dimensions") {
  GridProbeResult probe =
      grid_probe(PairRegionExample::Cross, {2.0, 1.0}, 64, 10.0);
  const std::string path = "/tmp/ledtree_probe_test.pgm";
  write_pgm(path, probe);
  std::string content = read_text_file(path);
  CHECK(content.rfind("P5\n64 64\n255\n", 0) == 0);
  CHECK(content.size() == std::string("P5\n64 64\n255\n").size() + 64 * 64);
  std::remove(path.c_str());
}
