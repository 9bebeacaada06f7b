#pragma once

#include <string>
#include <vector>

#include "ledtree/tree.hpp"

namespace ledtree {

/// Meanings x languages table of cognate-class tokens. Tokens are scoped per
/// meaning: equal tokens under one meaning mark translations with a shared
/// etymology, equal tokens under different meanings are unrelated. An empty
/// string marks missing data.
struct CognateTable {
  std::vector<std::string> meanings;
  std::vector<std::string> languages;
  std::vector<std::vector<std::string>> cells;  // [meaning][language]

  int meaning_count() const { return static_cast<int>(meanings.size()); }
  int language_count() const { return static_cast<int>(languages.size()); }
};

enum class CognateWeighting { Binary, Quartic };

CognateWeighting parse_weighting(const std::string& name);
const char* to_string(CognateWeighting weighting);

struct EmbeddingColumn {
  int meaning = 0;       // meaning row index
  std::string token;     // cognate-class token of this group
  int group_count = 0;   // number of groups of the meaning
};

/// One coordinate per cognate group across all meanings. With binary
/// weighting a language's coordinate is 1 when it has a word in the group;
/// with quartic weighting it is (c_max - c + 1)^4 where c is the group count
/// of the meaning and c_max the maximum group count over all meanings.
struct FeatureEmbedding {
  Eigen::MatrixXd coords;  // language_count x column_count
  CognateWeighting weighting = CognateWeighting::Binary;
  int c_max = 0;
  std::vector<EmbeddingColumn> columns;
  std::vector<std::string> languages;
};

FeatureEmbedding embed_cognates(const CognateTable& table, CognateWeighting weighting);

struct ReembedResult {
  std::vector<Point> points;  // one per language, dimension language_count - 1
  bool has_coincident = false;
  std::vector<std::pair<int, int>> coincident_pairs;
};

/// Isometric re-embedding of the feature coordinates into exactly
/// (language_count - 1) dimensions via the Gram matrix of the centered
/// coordinates. Coincident languages stay coincident and are flagged.
ReembedResult simplex_reembed(const FeatureEmbedding& embedding);

struct InferredType {
  HangingType hanging_type;
  Placement placement;           // the stretched tree built by agglomeration
  std::vector<std::string> leaf_labels;  // by leaf offset
};

/// Agglomerative hanging-type inference: repeatedly joins the two closest
/// subtree roots by the equal-depth point of their segment. Distance ties
/// break toward the lexicographically smallest label pair; when the closest
/// pair admits no equal-depth point the next-closest pairs are tried, up to
/// `fallback_width` candidates per stage. Throws TopologyInferenceFailed
/// (carrying the stage) when no candidate pair is admissible.
InferredType infer_hanging_type(const std::vector<Point>& points,
                                const std::vector<std::string>& labels,
                                int fallback_width = 3);

/// Splitting times in years before present: years(v) scales the anchor age
/// by height(v) / height(anchor); leaves date to zero. The returned vector
/// is indexed by vertex. Throws ZeroAnchorHeight.
std::vector<double> date_splits(const LedTreeInstance& instance, int anchor_vertex,
                                double anchor_years);

/// Lowest common ancestor of a set of leaf vertices.
int lowest_common_ancestor(const TreeTopology& topology, const std::vector<int>& vertices);

}  // namespace ledtree
