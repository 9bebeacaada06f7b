#include <benchmark/benchmark.h>

#include <random>

#include "ledtree/feasible_set.hpp"
#include "ledtree/phylo.hpp"
#include "ledtree/solver.hpp"
#include "ledtree/tree.hpp"

using namespace ledtree;

namespace {

Point pt(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

HangingType triangle_type() {
  HangingType ht;
  ht.topology = build_topology({{0, 2, 3}, {1, 0, 4}}, 3);
  ht.dim = 2;
  ht.leaf_coords = {pt(-1, 0), pt(1, 0), pt(0, 2)};
  return ht;
}

HangingType random_type(std::uint64_t seed, int leaves, int dim) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  while (true) {
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
    }
  }
}

}  // namespace

static void BM_Evaluate(benchmark::State& state) {
  HangingType ht = random_type(1, static_cast<int>(state.range(0)), 2);
  auto shared = std::make_shared<const HangingType>(ht);
  Placement p = stretched_tree(ht);
  for (auto _ : state) {
    LedTreeInstance inst = evaluate(shared, p);
    benchmark::DoNotOptimize(inst.total_length());
  }
}
BENCHMARK(BM_Evaluate)->Arg(8)->Arg(16)->Arg(32);

static void BM_StretchedTree(benchmark::State& state) {
  HangingType ht = random_type(2, static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    Placement p = stretched_tree(ht);
    benchmark::DoNotOptimize(p.inner.front()[0]);
  }
}
BENCHMARK(BM_StretchedTree)->Arg(8)->Arg(32);

static void BM_MinimizeTriangle(benchmark::State& state) {
  HangingType ht = triangle_type();
  SolveOptions opt;
  opt.restarts = 1;
  for (auto _ : state) {
    Solution s = minimize(ht, opt);
    benchmark::DoNotOptimize(s.length);
  }
}
BENCHMARK(BM_MinimizeTriangle);

static void BM_MinimizeRandom(benchmark::State& state) {
  HangingType ht = random_type(3, static_cast<int>(state.range(0)), 2);
  SolveOptions opt;
  opt.restarts = 1;
  for (auto _ : state) {
    Solution s = minimize(ht, opt);
    benchmark::DoNotOptimize(s.length);
  }
}
BENCHMARK(BM_MinimizeRandom)->Arg(4)->Arg(8)->Arg(12);

static void BM_GridProbeRow(benchmark::State& state) {
  PairRegionParams params{2.0, 1.0};
  const int n = 512;
  int row = 0;
  for (auto _ : state) {
    const double t = -10.0 + 20.0 * (row % n) / (n - 1);
    bool acc = false;
    for (int col = 0; col < n; ++col) {
      const double s = -10.0 + 20.0 * col / (n - 1);
      acc ^= pair_region_membership(PairRegionExample::NestedCollinear, params, s, t);
    }
    benchmark::DoNotOptimize(acc);
    ++row;
  }
}
BENCHMARK(BM_GridProbeRow);

static void BM_SimplexReembed(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const int nl = static_cast<int>(state.range(0));
  CognateTable table;
  for (int l = 0; l < nl; ++l) table.languages.push_back("L" + std::to_string(l));
  std::uniform_int_distribution<int> groups(1, 6);
  for (int m = 0; m < 207; ++m) {
    table.meanings.push_back("m" + std::to_string(m));
    std::vector<std::string> row(static_cast<size_t>(nl));
    for (auto& cell : row) cell = "g" + std::to_string(groups(rng));
    table.cells.push_back(std::move(row));
  }
  FeatureEmbedding emb = embed_cognates(table, CognateWeighting::Quartic);
  for (auto _ : state) {
    ReembedResult re = simplex_reembed(emb);
    benchmark::DoNotOptimize(re.points.front()[0]);
  }
}
BENCHMARK(BM_SimplexReembed)->Arg(8)->Arg(18);

BENCHMARK_MAIN();
