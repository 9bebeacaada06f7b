#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ledtree/certificate.hpp"
#include "ledtree/feasible_set.hpp"
#include "ledtree/phylo.hpp"
#include "ledtree/solver.hpp"
#include "ledtree/tree.hpp"

namespace ledtree {

/// A hanging type plus optional inner coordinates and leaf labels, as stored
/// in the tree JSON format:
///   { "n": dim, "leaves": [{"id","label","coords"}],
///     "inner": [{"id","left","right","coords"?}], "root": id }
/// Vertex ids are arbitrary and normalized to the internal indexing on load.
struct TreeDocument {
  HangingType hanging_type;
  std::optional<Placement> placement;
  std::vector<std::string> leaf_labels;  // by leaf offset
};

TreeDocument parse_tree_json(const std::string& text);
TreeDocument read_tree_json(const std::string& path);
std::string tree_json_string(const HangingType& ht, const std::vector<std::string>& leaf_labels,
                             const Placement* placement);
void write_tree_json(const std::string& path, const HangingType& ht,
                     const std::vector<std::string>& leaf_labels, const Placement* placement);

/// Solution JSON: the solved tree (with inner coordinates) plus lengths,
/// residuals, slack lengths and per-restart summaries.
std::string solution_json_string(const HangingType& ht,
                                 const std::vector<std::string>& leaf_labels,
                                 const Solution& solution);
void write_solution_json(const std::string& path, const HangingType& ht,
                         const std::vector<std::string>& leaf_labels, const Solution& solution);

/// Reads either a tree JSON or a solution JSON (whose "tree" member is then
/// used); the document must carry inner coordinates.
TreeDocument read_tree_or_solution_json(const std::string& path);
TreeDocument parse_tree_or_solution_json(const std::string& text);

/// Newick export with branch lengths (12 significant digits); labels are
/// quoted when they contain structural characters.
std::string to_newick(const LedTreeInstance& instance,
                      const std::vector<std::string>& leaf_labels);

/// Cognate TSV: header row holds language labels (first cell ignored), each
/// following row holds a meaning label and one cognate-class token per
/// language; empty cells mark missing data.
CognateTable parse_cognate_tsv(const std::string& text);
CognateTable read_cognate_tsv(const std::string& path);

std::string embedding_json_string(const FeatureEmbedding& embedding);
FeatureEmbedding parse_embedding_json(const std::string& text);
FeatureEmbedding read_embedding_json(const std::string& path);

std::string certificate_json_string(const DualCertificate& certificate, const KktReport& kkt,
                                    const GeometricReport& geometry);

std::string dated_json_string(const LedTreeInstance& instance,
                              const std::vector<std::string>& leaf_labels,
                              const std::vector<double>& years, int anchor_vertex,
                              double anchor_years);

std::string probe_json_string(PairRegionExample example, const PairRegionParams& params,
                              const BoundaryCurve& curve, const GridProbeResult& probe);

void write_pgm(const std::string& path, const GridProbeResult& probe);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace ledtree
