#include "ledtree/phylo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "ledtree/feasible_set.hpp"

namespace ledtree {

CognateWeighting parse_weighting(const std::string& name) {
  if (name == "binary") return CognateWeighting::Binary;
  if (name == "quartic") return CognateWeighting::Quartic;
  throw Error(ErrorCode::InvalidInput, "unknown weighting '" + name + "'");
}

const char* to_string(CognateWeighting weighting) {
  return weighting == CognateWeighting::Binary ? "binary" : "quartic";
}

FeatureEmbedding embed_cognates(const CognateTable& table, CognateWeighting weighting) {
  if (table.meaning_count() == 0 || table.language_count() == 0)
    throw Error(ErrorCode::EmptyTable, "cognate table has no meanings or no languages");
  for (const auto& row : table.cells)
    if (static_cast<int>(row.size()) != table.language_count())
      throw Error(ErrorCode::InvalidInput, "ragged cognate table row");
  if (static_cast<int>(table.cells.size()) != table.meaning_count())
    throw Error(ErrorCode::InvalidInput, "cognate table row count mismatch");

  for (int l = 0; l < table.language_count(); ++l) {
    bool any = false;
    for (int m = 0; m < table.meaning_count(); ++m)
      if (!table.cells[static_cast<size_t>(m)][static_cast<size_t>(l)].empty()) any = true;
    if (!any)
      throw Error(ErrorCode::AllMissingRow,
                  "language '" + table.languages[static_cast<size_t>(l)] + "' has no data", l);
  }

  FeatureEmbedding emb;
  emb.weighting = weighting;
  emb.languages = table.languages;

  // Group tokens per meaning in order of first appearance over languages,
  // then count groups to fix c_max.
  std::vector<std::vector<std::string>> group_tokens(static_cast<size_t>(table.meaning_count()));
  emb.c_max = 0;
  for (int m = 0; m < table.meaning_count(); ++m) {
    auto& tokens = group_tokens[static_cast<size_t>(m)];
    for (int l = 0; l < table.language_count(); ++l) {
      const std::string& tok = table.cells[static_cast<size_t>(m)][static_cast<size_t>(l)];
      if (tok.empty()) continue;
      if (std::find(tokens.begin(), tokens.end(), tok) == tokens.end()) tokens.push_back(tok);
    }
    emb.c_max = std::max(emb.c_max, static_cast<int>(tokens.size()));
  }

  for (int m = 0; m < table.meaning_count(); ++m)
    for (const std::string& tok : group_tokens[static_cast<size_t>(m)])
      emb.columns.push_back(
          {m, tok, static_cast<int>(group_tokens[static_cast<size_t>(m)].size())});

  emb.coords = Eigen::MatrixXd::Zero(table.language_count(),
                                     static_cast<Eigen::Index>(emb.columns.size()));
  for (size_t col = 0; col < emb.columns.size(); ++col) {
    const EmbeddingColumn& column = emb.columns[col];
    double weight = 1.0;
    if (weighting == CognateWeighting::Quartic) {
      const double base = emb.c_max - column.group_count + 1;
      weight = base * base * base * base;
    }
    for (int l = 0; l < table.language_count(); ++l)
      if (table.cells[static_cast<size_t>(column.meaning)][static_cast<size_t>(l)] ==
          column.token)
        emb.coords(l, static_cast<Eigen::Index>(col)) = weight;
  }
  return emb;
}

ReembedResult simplex_reembed(const FeatureEmbedding& embedding) {
  const int nl = static_cast<int>(embedding.coords.rows());
  if (nl < 2) throw Error(ErrorCode::InvalidInput, "need at least two languages");
  const int target = nl - 1;

  Eigen::MatrixXd centered = embedding.coords;
  centered.rowwise() -= embedding.coords.colwise().mean();
  Eigen::MatrixXd gram = centered * centered.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  ReembedResult res;
  res.points.assign(static_cast<size_t>(nl), Point::Zero(target));

  // Eigenvalues ascending; use the top `target` ones, clipping numerically
  // negative values and zero-padding past the rank.
  for (int k = 0; k < target; ++k) {
    const int src = nl - 1 - k;
    const double value = eig.eigenvalues()[src];
    if (value <= 0.0) continue;
    Eigen::VectorXd column = eig.eigenvectors().col(src) * std::sqrt(value);
    // Deterministic sign: largest-magnitude entry positive.
    int arg = 0;
    for (int i = 1; i < nl; ++i)
      if (std::abs(column[i]) > std::abs(column[arg])) arg = i;
    if (column[arg] < 0.0) column = -column;
    for (int i = 0; i < nl; ++i) res.points[static_cast<size_t>(i)][k] = column[i];
  }

  // Coincident languages are kept exactly coincident: snap later duplicates
  // onto their first representative.
  const double scale = embedding.coords.cwiseAbs().maxCoeff() + 1.0;
  for (int i = 0; i < nl; ++i)
    for (int j = i + 1; j < nl; ++j)
      if ((embedding.coords.row(i) - embedding.coords.row(j)).norm() <= 1e-12 * scale) {
        res.has_coincident = true;
        res.coincident_pairs.emplace_back(i, j);
        res.points[static_cast<size_t>(j)] = res.points[static_cast<size_t>(i)];
      }
  return res;
}

namespace {

struct Cluster {
  Point root_position;
  double height = 0.0;
  std::string label;        // lexicographically smallest leaf label
  int node = -1;            // final vertex index once known (leaves) or builder id
  bool is_leaf = false;
  int builder_id = -1;      // node id in the builder arena
};

struct BuilderNode {
  int left = -1, right = -1;  // builder ids, -1 for leaves
  int leaf_index = -1;        // for leaves: original point index
  Point position;             // stretched position for inner nodes
};

}  // namespace

InferredType infer_hanging_type(const std::vector<Point>& points,
                                const std::vector<std::string>& labels, int fallback_width) {
  const int np = static_cast<int>(points.size());
  if (np < 2) throw Error(ErrorCode::InvalidInput, "need at least two points");
  if (static_cast<int>(labels.size()) != np)
    throw Error(ErrorCode::InvalidInput, "one label per point required");
  if (fallback_width < 1) fallback_width = 1;
  const int dim = static_cast<int>(points.front().size());
  for (const auto& p : points)
    if (p.size() != dim)
      throw Error(ErrorCode::DimensionMismatch, "points of mixed dimension");

  std::vector<BuilderNode> arena;
  std::vector<Cluster> active;
  for (int i = 0; i < np; ++i) {
    BuilderNode node;
    node.leaf_index = i;
    node.position = points[static_cast<size_t>(i)];
    arena.push_back(node);
    Cluster c;
    c.root_position = points[static_cast<size_t>(i)];
    c.height = 0.0;
    c.label = labels[static_cast<size_t>(i)];
    c.is_leaf = true;
    c.builder_id = i;
    active.push_back(std::move(c));
  }

  int stage = 0;
  while (active.size() > 1) {
    ++stage;
    struct Candidate {
      double distance;
      std::string lo, hi;
      size_t i, j;
    };
    std::vector<Candidate> candidates;
    for (size_t i = 0; i < active.size(); ++i)
      for (size_t j = i + 1; j < active.size(); ++j) {
        Candidate c;
        c.distance = (active[i].root_position - active[j].root_position).norm();
        c.lo = std::min(active[i].label, active[j].label);
        c.hi = std::max(active[i].label, active[j].label);
        c.i = i;
        c.j = j;
        candidates.push_back(std::move(c));
      }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.distance != b.distance) return a.distance < b.distance;
      if (a.lo != b.lo) return a.lo < b.lo;
      return a.hi < b.hi;
    });

    bool merged = false;
    const int width = std::min<int>(fallback_width, static_cast<int>(candidates.size()));
    for (int k = 0; k < width && !merged; ++k) {
      const Candidate& cand = candidates[static_cast<size_t>(k)];
      const Cluster& a = active[cand.i];
      const Cluster& b = active[cand.j];
      Point root;
      if (cand.distance == 0.0) {
        if (a.height != b.height) continue;
        root = a.root_position;
      } else {
        try {
          root = root_on_segment(a.root_position, b.root_position, a.height, b.height);
        } catch (const Error&) {
          continue;  // inadmissible pair, try the next closest
        }
      }
      BuilderNode node;
      node.left = a.builder_id;
      node.right = b.builder_id;
      node.position = root;
      const int id = static_cast<int>(arena.size());
      arena.push_back(node);

      Cluster c;
      c.root_position = root;
      c.height = std::max((root - a.root_position).norm() + a.height,
                          (root - b.root_position).norm() + b.height);
      c.label = std::min(a.label, b.label);
      c.builder_id = id;
      const size_t hi_idx = std::max(cand.i, cand.j);
      const size_t lo_idx = std::min(cand.i, cand.j);
      active.erase(active.begin() + static_cast<long>(hi_idx));
      active.erase(active.begin() + static_cast<long>(lo_idx));
      active.push_back(std::move(c));
      merged = true;
    }
    if (!merged)
      throw Error(ErrorCode::TopologyInferenceFailed,
                  "no admissible pair within the fallback width at stage " +
                      std::to_string(stage),
                  stage);
  }

  // Normalize indices: inner vertices take their creation order, leaves
  // follow in input order.
  const int nv = np - 1;
  std::vector<int> final_index(arena.size(), -1);
  int next_inner = 0;
  for (size_t id = 0; id < arena.size(); ++id) {
    if (arena[id].leaf_index >= 0)
      final_index[id] = nv + arena[id].leaf_index;
    else
      final_index[id] = next_inner++;
  }

  std::vector<std::array<int, 3>> child_pairs;
  Placement placement = Placement::zeros(nv, dim);
  for (size_t id = 0; id < arena.size(); ++id) {
    if (arena[id].leaf_index >= 0) continue;
    const int me = final_index[id];
    child_pairs.push_back({me, final_index[static_cast<size_t>(arena[id].left)],
                           final_index[static_cast<size_t>(arena[id].right)]});
    placement.inner[static_cast<size_t>(me)] = arena[id].position;
  }

  InferredType out;
  out.hanging_type.topology = build_topology(child_pairs, np);
  out.hanging_type.dim = dim;
  out.hanging_type.leaf_coords = points;
  out.placement = placement;
  out.leaf_labels = labels;
  return out;
}

std::vector<double> date_splits(const LedTreeInstance& inst, int anchor_vertex,
                                double anchor_years) {
  const TreeTopology& t = inst.topology();
  if (anchor_vertex < 0 || anchor_vertex >= t.vertex_count())
    throw Error(ErrorCode::IndexRangeViolation, "anchor vertex out of range", anchor_vertex);
  const double anchor_height = inst.height(anchor_vertex);
  if (anchor_height <= 0.0)
    throw Error(ErrorCode::ZeroAnchorHeight, "anchor vertex has zero height", anchor_vertex);

  std::vector<double> years(static_cast<size_t>(t.vertex_count()), 0.0);
  for (int v = 0; v < t.vertex_count(); ++v)
    years[static_cast<size_t>(v)] = anchor_years * inst.height(v) / anchor_height;
  return years;
}

int lowest_common_ancestor(const TreeTopology& t, const std::vector<int>& vertices) {
  if (vertices.empty()) throw Error(ErrorCode::InvalidInput, "empty vertex set");
  auto ancestors = [&t](int v) {
    std::vector<int> chain;
    for (int u = v; u != -1; u = t.parent[static_cast<size_t>(u)]) chain.push_back(u);
    return chain;
  };
  std::vector<int> common = ancestors(vertices.front());
  for (size_t k = 1; k < vertices.size(); ++k) {
    std::vector<int> chain = ancestors(vertices[k]);
    std::vector<int> keep;
    for (int v : common)
      if (std::find(chain.begin(), chain.end(), v) != chain.end()) keep.push_back(v);
    common = std::move(keep);
  }
  return common.front();  // deepest shared ancestor comes first
}

}  // namespace ledtree
