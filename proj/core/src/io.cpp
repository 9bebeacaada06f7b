#include "ledtree/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace ledtree {

using json = nlohmann::ordered_json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write '" + path + "'");
  out << content;
}

namespace {

json point_to_json(const Point& p) {
  json arr = json::array();
  for (int k = 0; k < p.size(); ++k) arr.push_back(p[k]);
  return arr;
}

Point point_from_json(const json& arr, int expected_dim) {
  if (!arr.is_array()) throw Error(ErrorCode::InvalidInput, "coords must be an array");
  Point p(static_cast<Eigen::Index>(arr.size()));
  for (size_t k = 0; k < arr.size(); ++k) p[static_cast<Eigen::Index>(k)] = arr[k].get<double>();
  if (expected_dim >= 0 && p.size() != expected_dim)
    throw Error(ErrorCode::DimensionMismatch, "coordinate dimension mismatch");
  return p;
}

json tree_to_json(const HangingType& ht, const std::vector<std::string>& leaf_labels,
                  const Placement* placement) {
  const TreeTopology& t = ht.topology;
  json doc;
  doc["n"] = ht.dim;
  json leaves = json::array();
  for (int v = t.inner_count(); v < t.vertex_count(); ++v) {
    json leaf;
    leaf["id"] = v;
    const size_t off = static_cast<size_t>(v - t.inner_count());
    leaf["label"] = off < leaf_labels.size() ? leaf_labels[off] : std::string();
    leaf["coords"] = point_to_json(ht.leaf_position(v));
    leaves.push_back(std::move(leaf));
  }
  doc["leaves"] = std::move(leaves);
  json inner = json::array();
  for (int i = 0; i < t.inner_count(); ++i) {
    json node;
    node["id"] = i;
    node["left"] = t.left_child(i);
    node["right"] = t.right_child(i);
    if (placement) node["coords"] = point_to_json(placement->inner[static_cast<size_t>(i)]);
    inner.push_back(std::move(node));
  }
  doc["inner"] = std::move(inner);
  doc["root"] = t.root;
  return doc;
}

TreeDocument tree_from_json(const json& doc) {
  if (!doc.contains("n") || !doc.contains("leaves") || !doc.contains("inner") ||
      !doc.contains("root"))
    throw Error(ErrorCode::InvalidInput, "tree JSON needs n, leaves, inner and root members");

  const int dim = doc["n"].get<int>();
  const auto& leaves = doc["leaves"];
  const auto& inner = doc["inner"];
  const int nl = static_cast<int>(leaves.size());
  const int nv = static_cast<int>(inner.size());
  if (nl < 2) throw Error(ErrorCode::InvalidInput, "at least two leaves required");
  if (nv != nl - 1)
    throw Error(ErrorCode::NotFullBinary, "inner vertex count must be leaf count minus one");

  // Normalize arbitrary ids: inner vertices take their order of appearance,
  // leaves follow in order after them.
  std::map<long long, int> index_of;
  for (int i = 0; i < nv; ++i) {
    const long long id = inner[static_cast<size_t>(i)].at("id").get<long long>();
    if (!index_of.emplace(id, i).second)
      throw Error(ErrorCode::InvalidInput, "duplicate vertex id " + std::to_string(id));
  }
  for (int k = 0; k < nl; ++k) {
    const long long id = leaves[static_cast<size_t>(k)].at("id").get<long long>();
    if (!index_of.emplace(id, nv + k).second)
      throw Error(ErrorCode::InvalidInput, "duplicate vertex id " + std::to_string(id));
  }

  TreeDocument out;
  out.hanging_type.dim = dim;
  out.leaf_labels.resize(static_cast<size_t>(nl));
  out.hanging_type.leaf_coords.resize(static_cast<size_t>(nl));
  for (int k = 0; k < nl; ++k) {
    const auto& leaf = leaves[static_cast<size_t>(k)];
    out.leaf_labels[static_cast<size_t>(k)] =
        leaf.contains("label") ? leaf["label"].get<std::string>() : std::string();
    out.hanging_type.leaf_coords[static_cast<size_t>(k)] =
        point_from_json(leaf.at("coords"), dim);
  }

  auto lookup = [&index_of](long long id) {
    auto it = index_of.find(id);
    if (it == index_of.end())
      throw Error(ErrorCode::InvalidInput, "unknown vertex id " + std::to_string(id));
    return it->second;
  };

  std::vector<std::array<int, 3>> child_pairs;
  bool any_coords = false;
  std::vector<Point> inner_coords(static_cast<size_t>(nv));
  for (int i = 0; i < nv; ++i) {
    const auto& node = inner[static_cast<size_t>(i)];
    child_pairs.push_back(
        {i, lookup(node.at("left").get<long long>()), lookup(node.at("right").get<long long>())});
    if (node.contains("coords") && !node["coords"].is_null()) {
      any_coords = true;
      inner_coords[static_cast<size_t>(i)] = point_from_json(node["coords"], dim);
    }
  }
  out.hanging_type.topology = build_topology(child_pairs, nl);
  const int declared_root = lookup(doc["root"].get<long long>());
  if (declared_root != out.hanging_type.topology.root)
    throw Error(ErrorCode::InvalidInput, "declared root does not match the parent structure");
  out.hanging_type.validate();

  if (any_coords) {
    for (int i = 0; i < nv; ++i)
      if (inner_coords[static_cast<size_t>(i)].size() != dim)
        throw Error(ErrorCode::InvalidInput, "inner coordinates must be given for all vertices");
    Placement p;
    p.inner = std::move(inner_coords);
    out.placement = std::move(p);
  }
  return out;
}

json parse_json_text(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::InvalidInput, "malformed JSON");
  return doc;
}

}  // namespace

TreeDocument parse_tree_json(const std::string& text) {
  return tree_from_json(parse_json_text(text));
}

TreeDocument read_tree_json(const std::string& path) {
  return parse_tree_json(read_text_file(path));
}

std::string tree_json_string(const HangingType& ht, const std::vector<std::string>& leaf_labels,
                             const Placement* placement) {
  return tree_to_json(ht, leaf_labels, placement).dump(2) + "\n";
}

void write_tree_json(const std::string& path, const HangingType& ht,
                     const std::vector<std::string>& leaf_labels, const Placement* placement) {
  write_text_file(path, tree_json_string(ht, leaf_labels, placement));
}

std::string solution_json_string(const HangingType& ht,
                                 const std::vector<std::string>& leaf_labels,
                                 const Solution& solution) {
  json doc;
  doc["tree"] = tree_to_json(ht, leaf_labels, &solution.placement);
  doc["status"] = to_string(solution.status);
  doc["length"] = solution.length;
  LedTreeInstance inst = evaluate(ht, solution.placement);
  json lengths = json::array();
  for (int j = 0; j < inst.edge_lengths().size(); ++j) lengths.push_back(inst.edge_length(j));
  doc["edge_lengths"] = std::move(lengths);
  json residuals = json::array();
  Eigen::VectorXd r = led_residuals(inst);
  for (int i = 0; i < r.size(); ++i) residuals.push_back(r[i]);
  doc["residuals"] = std::move(residuals);
  json z = json::array();
  for (int j = 0; j < solution.relaxed_lengths.size(); ++j)
    z.push_back(solution.relaxed_lengths[j]);
  doc["relaxed_lengths"] = std::move(z);
  doc["stationarity_defect"] = solution.stationarity_defect;
  doc["max_residual"] = solution.max_residual;
  doc["max_slack"] = solution.max_slack;
  doc["min_multiplier"] = solution.min_multiplier;
  doc["hit_regularity_boundary"] = solution.hit_regularity_boundary;
  doc["newton_iterations"] = solution.newton_iterations;
  json restarts = json::array();
  for (const auto& rs : solution.restarts) {
    json item;
    item["index"] = rs.index;
    item["status"] = to_string(rs.status);
    item["length"] = rs.length;
    item["newton_iterations"] = rs.newton_iterations;
    restarts.push_back(std::move(item));
  }
  doc["restarts"] = std::move(restarts);
  return doc.dump(2) + "\n";
}

void write_solution_json(const std::string& path, const HangingType& ht,
                         const std::vector<std::string>& leaf_labels, const Solution& solution) {
  write_text_file(path, solution_json_string(ht, leaf_labels, solution));
}

TreeDocument parse_tree_or_solution_json(const std::string& text) {
  json doc = parse_json_text(text);
  if (doc.contains("tree")) return tree_from_json(doc["tree"]);
  return tree_from_json(doc);
}

TreeDocument read_tree_or_solution_json(const std::string& path) {
  return parse_tree_or_solution_json(read_text_file(path));
}

namespace {

std::string newick_escape(const std::string& label) {
  const bool needs_quotes =
      label.find_first_of(" \t\n()[]{}:;,'") != std::string::npos || label.empty();
  if (!needs_quotes) return label;
  std::string quoted = "'";
  for (char c : label) {
    quoted += c;
    if (c == '\'') quoted += '\'';
  }
  quoted += '\'';
  return quoted;
}

std::string format_length(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

void newick_rec(const LedTreeInstance& inst, const std::vector<std::string>& labels, int v,
                std::string& out) {
  const TreeTopology& t = inst.topology();
  if (t.is_leaf(v)) {
    const size_t off = static_cast<size_t>(v - t.inner_count());
    out += newick_escape(off < labels.size() ? labels[off] : "leaf" + std::to_string(v));
  } else {
    out += '(';
    newick_rec(inst, labels, t.left_child(v), out);
    out += ',';
    newick_rec(inst, labels, t.right_child(v), out);
    out += ')';
  }
  if (v != t.root) {
    out += ':';
    out += format_length(inst.edge_length(t.edge_to_parent(v)));
  }
}

}  // namespace

std::string to_newick(const LedTreeInstance& inst, const std::vector<std::string>& labels) {
  std::string out;
  newick_rec(inst, labels, inst.topology().root, out);
  out += ";\n";
  return out;
}

CognateTable parse_cognate_tsv(const std::string& text) {
  CognateTable table;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, '\t')) cells.push_back(cell);
    if (line.back() == '\t') cells.push_back("");
    if (header) {
      if (cells.size() < 2)
        throw Error(ErrorCode::InvalidInput, "TSV header needs at least one language column");
      table.languages.assign(cells.begin() + 1, cells.end());
      header = false;
      continue;
    }
    if (cells.empty()) continue;
    table.meanings.push_back(cells.front());
    std::vector<std::string> row(table.languages.size());
    for (size_t k = 0; k < table.languages.size(); ++k)
      row[k] = k + 1 < cells.size() ? cells[k + 1] : std::string();
    table.cells.push_back(std::move(row));
  }
  if (table.languages.empty() || table.meanings.empty())
    throw Error(ErrorCode::EmptyTable, "cognate TSV has no data");
  return table;
}

CognateTable read_cognate_tsv(const std::string& path) {
  return parse_cognate_tsv(read_text_file(path));
}

std::string embedding_json_string(const FeatureEmbedding& emb) {
  json doc;
  doc["weighting"] = to_string(emb.weighting);
  doc["c_max"] = emb.c_max;
  json langs = json::array();
  for (const auto& l : emb.languages) langs.push_back(l);
  doc["languages"] = std::move(langs);
  json cols = json::array();
  for (const auto& c : emb.columns) {
    json col;
    col["meaning"] = c.meaning;
    col["token"] = c.token;
    col["group_count"] = c.group_count;
    cols.push_back(std::move(col));
  }
  doc["columns"] = std::move(cols);
  json rows = json::array();
  for (int i = 0; i < emb.coords.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < emb.coords.cols(); ++j) row.push_back(emb.coords(i, j));
    rows.push_back(std::move(row));
  }
  doc["coordinates"] = std::move(rows);
  return doc.dump(2) + "\n";
}

FeatureEmbedding parse_embedding_json(const std::string& text) {
  json doc = parse_json_text(text);
  FeatureEmbedding emb;
  if (!doc.contains("languages") || !doc.contains("coordinates"))
    throw Error(ErrorCode::InvalidInput, "embedding JSON needs languages and coordinates");
  for (const auto& l : doc["languages"]) emb.languages.push_back(l.get<std::string>());
  if (doc.contains("weighting")) emb.weighting = parse_weighting(doc["weighting"].get<std::string>());
  if (doc.contains("c_max")) emb.c_max = doc["c_max"].get<int>();
  const auto& rows = doc["coordinates"];
  const int nl = static_cast<int>(rows.size());
  if (nl != static_cast<int>(emb.languages.size()))
    throw Error(ErrorCode::InvalidInput, "one coordinate row per language required");
  const int ncols = nl > 0 ? static_cast<int>(rows[0].size()) : 0;
  emb.coords = Eigen::MatrixXd::Zero(nl, ncols);
  for (int i = 0; i < nl; ++i) {
    if (static_cast<int>(rows[static_cast<size_t>(i)].size()) != ncols)
      throw Error(ErrorCode::InvalidInput, "ragged coordinate rows");
    for (int j = 0; j < ncols; ++j)
      emb.coords(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)].get<double>();
  }
  if (doc.contains("columns")) {
    for (const auto& col : doc["columns"]) {
      EmbeddingColumn c;
      c.meaning = col.value("meaning", 0);
      c.token = col.value("token", std::string());
      c.group_count = col.value("group_count", 0);
      emb.columns.push_back(std::move(c));
    }
  }
  return emb;
}

FeatureEmbedding read_embedding_json(const std::string& path) {
  return parse_embedding_json(read_text_file(path));
}

namespace {

json block_to_json(const KktBlock& block) {
  json b;
  b["defect"] = block.defect;
  b["tolerance"] = block.tolerance;
  b["pass"] = block.pass;
  return b;
}

}  // namespace

std::string certificate_json_string(const DualCertificate& cert, const KktReport& kkt,
                                    const GeometricReport& geometry) {
  json doc;
  doc["verdict"] = kkt.certified ? "CERTIFIED" : "NOT_CERTIFIED";
  json y = json::array();
  for (int j = 0; j < cert.y.size(); ++j) y.push_back(cert.y[j]);
  doc["y"] = std::move(y);
  json x = json::array();
  for (int i = 0; i < cert.x.size(); ++i) x.push_back(cert.x[i]);
  doc["x"] = std::move(x);
  json z = json::array();
  for (int j = 0; j < cert.z.size(); ++j) z.push_back(cert.z[j]);
  doc["z"] = std::move(z);
  json defects = json::array();
  for (int i = 0; i < cert.vertex_equation_defect.size(); ++i)
    defects.push_back(cert.vertex_equation_defect[i]);
  doc["vertex_equation_defect"] = std::move(defects);

  json blocks;
  blocks["stationarity_beta"] = block_to_json(kkt.stationarity_beta);
  blocks["stationarity_z"] = block_to_json(kkt.stationarity_z);
  blocks["primal_feasibility"] = block_to_json(kkt.primal_feasibility);
  blocks["complementarity"] = block_to_json(kkt.complementarity);
  blocks["positivity"] = block_to_json(kkt.positivity);
  doc["blocks"] = std::move(blocks);
  doc["min_y"] = kkt.min_y;

  json geom;
  geom["root_collinearity_defect"] = geometry.root_collinearity_defect;
  geom["min_root_child_angle"] = geometry.min_root_child_angle;
  geom["max_coplanarity_defect"] = geometry.max_coplanarity_defect;
  geom["all_properly_forked"] = geometry.all_properly_forked;
  json vertices = json::array();
  for (const auto& v : geometry.vertices) {
    json item;
    item["vertex"] = v.vertex;
    item["is_root"] = v.is_root;
    item["directions_defined"] = v.directions_defined;
    item["properly_forked"] = v.properly_forked;
    item["child_angle"] = v.child_angle;
    item["coplanarity_defect"] = v.coplanarity_defect;
    item["cone_interior"] = v.cone_interior;
    item["cone_margin"] = v.cone_margin;
    vertices.push_back(std::move(item));
  }
  geom["vertices"] = std::move(vertices);
  doc["geometry"] = std::move(geom);
  return doc.dump(2) + "\n";
}

std::string dated_json_string(const LedTreeInstance& inst,
                              const std::vector<std::string>& labels,
                              const std::vector<double>& years, int anchor_vertex,
                              double anchor_years) {
  const TreeTopology& t = inst.topology();
  json doc;
  doc["anchor_vertex"] = anchor_vertex;
  doc["anchor_years"] = anchor_years;
  json entries = json::array();
  for (int v = 0; v < t.vertex_count(); ++v) {
    json item;
    item["id"] = v;
    if (t.is_leaf(v)) {
      const size_t off = static_cast<size_t>(v - t.inner_count());
      item["label"] = off < labels.size() ? labels[off] : std::string();
    }
    item["height"] = inst.height(v);
    item["years_before_present"] = years[static_cast<size_t>(v)];
    entries.push_back(std::move(item));
  }
  doc["vertices"] = std::move(entries);
  return doc.dump(2) + "\n";
}

std::string probe_json_string(PairRegionExample example, const PairRegionParams& params,
                              const BoundaryCurve& curve, const GridProbeResult& probe) {
  json doc;
  doc["example"] = to_string(example);
  doc["a"] = params.a;
  doc["c"] = params.c;
  switch (curve.kind) {
    case BoundaryCurve::Kind::Hyperbola: doc["boundary"] = "hyperbola"; break;
    case BoundaryCurve::Kind::QuarticOval: doc["boundary"] = "quartic_oval"; break;
    case BoundaryCurve::Kind::WholePlane: doc["boundary"] = "whole_plane"; break;
  }
  json coeffs;
  for (const auto& [monomial, value] : curve.coefficients) coeffs[monomial] = value;
  doc["coefficients"] = std::move(coeffs);
  doc["grid"] = probe.size;
  doc["range"] = probe.range;
  doc["feasible_components"] = probe.feasible_components;
  doc["holes"] = probe.holes;
  doc["all_feasible"] = probe.all_feasible;
  return doc.dump(2) + "\n";
}

void write_pgm(const std::string& path, const GridProbeResult& probe) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write '" + path + "'");
  out << "P5\n" << probe.size << " " << probe.size << "\n255\n";
  // Row 0 of the bitmap is t = -range; flip so the image reads bottom-up.
  for (int row = probe.size - 1; row >= 0; --row)
    for (int col = 0; col < probe.size; ++col)
      out.put(probe.cell(row, col) ? static_cast<char>(255) : static_cast<char>(0));
}

}  // namespace ledtree
