#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "ledtree/certificate.hpp"
#include "ledtree/feasible_set.hpp"
#include "ledtree/io.hpp"
#include "ledtree/log.hpp"
#include "ledtree/phylo.hpp"
#include "ledtree/solver.hpp"
#include "ledtree/svg.hpp"
#include "ledtree/tree.hpp"

namespace fs = std::filesystem;
using namespace ledtree;

namespace {

// Exit codes: 0 ok, 1 not certified (check-kkt), 2 input format,
// 3 infeasible, 4 not certified (minimize/pipeline), 5 internal.
constexpr int kExitOk = 0;
constexpr int kExitNotCertifiedCheck = 1;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNotCertified = 4;
constexpr int kExitInternal = 5;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::NotFullBinary:
    case ErrorCode::CyclicStructure:
    case ErrorCode::IndexRangeViolation:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::UnknownExample:
    case ErrorCode::ParameterViolation:
    case ErrorCode::EmptyTable:
    case ErrorCode::AllMissingRow:
    case ErrorCode::InvalidInput:
    case ErrorCode::DimensionUnsupported:
      return kExitInput;
    case ErrorCode::StretchInfeasible:
    case ErrorCode::InfeasiblePair:
    case ErrorCode::EmptyFeasibleGrid:
    case ErrorCode::TopologyInferenceFailed:
      return kExitInfeasible;
    default:
      return kExitInternal;
  }
}

struct SolverFlags {
  double tol_feas = 1e-9;
  double tol_stat = 1e-6;
  int restarts = 4;
  std::uint64_t seed = 0;
  std::string method = "relaxation_interior";
  int max_iterations = 600;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tol-feas", tol_feas, "feasibility tolerance (relative)");
    cmd->add_option("--tol-stat", tol_stat, "stationarity tolerance (relative)");
    cmd->add_option("--restarts", restarts, "number of perturbed restarts");
    cmd->add_option("--seed", seed, "deterministic seed");
    cmd->add_option("--method", method, "relaxation_interior | penalty_descent");
    cmd->add_option("--max-iterations", max_iterations, "Newton iteration cap");
  }

  SolveOptions options() const {
    SolveOptions opt;
    opt.tol_feas = tol_feas;
    opt.tol_stat = tol_stat;
    opt.restarts = restarts;
    opt.seed = seed;
    opt.method = parse_solve_method(method);
    opt.max_iterations = max_iterations;
    return opt;
  }
};

std::vector<std::string> split_csv(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(value);
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

int resolve_anchor(const TreeDocument& doc, const std::string& anchor_label, int anchor_vertex) {
  const TreeTopology& t = doc.hanging_type.topology;
  if (anchor_vertex >= 0) return anchor_vertex;
  if (anchor_label.empty())
    throw Error(ErrorCode::InvalidInput, "need --anchor-label or --anchor-vertex");
  std::vector<int> leaves;
  for (const std::string& label : split_csv(anchor_label)) {
    bool found = false;
    for (size_t off = 0; off < doc.leaf_labels.size(); ++off)
      if (doc.leaf_labels[off] == label) {
        leaves.push_back(t.inner_count() + static_cast<int>(off));
        found = true;
        break;
      }
    if (!found)
      throw Error(ErrorCode::InvalidInput, "no leaf labelled '" + label + "'");
  }
  int anchor = lowest_common_ancestor(t, leaves);
  // a leaf has zero height; its parent carries the split being dated
  if (t.is_leaf(anchor)) anchor = t.parent[static_cast<size_t>(anchor)];
  return anchor;
}

std::vector<double> years_from_dated_json(const std::string& path, int vertex_count) {
  nlohmann::json doc = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.contains("vertices"))
    throw Error(ErrorCode::InvalidInput, "malformed dated JSON '" + path + "'");
  std::vector<double> years(static_cast<size_t>(vertex_count), 0.0);
  for (const auto& item : doc["vertices"]) {
    const int id = item.at("id").get<int>();
    if (id >= 0 && id < vertex_count)
      years[static_cast<size_t>(id)] = item.at("years_before_present").get<double>();
  }
  return years;
}

int run_minimize_common(const TreeDocument& doc, const SolverFlags& flags,
                        const std::string& init_mode, const std::string& out_path,
                        const std::string& svg_path, const std::string& newick_path,
                        Solution& solution) {
  const HangingType& ht = doc.hanging_type;
  SolveOptions opt = flags.options();
  if (init_mode == "file") {
    if (!doc.placement)
      throw Error(ErrorCode::InvalidInput, "--init file needs inner coords in the input");
    solution = minimize(ht, *doc.placement, opt);
  } else {
    solution = minimize(ht, opt);
  }

  if (!out_path.empty() && solution.status != SolveStatus::Infeasible)
    write_solution_json(out_path, ht, doc.leaf_labels, solution);

  if (solution.status == SolveStatus::Infeasible) {
    std::printf("status: %s\n", to_string(solution.status));
    return kExitInfeasible;
  }

  LedTreeInstance inst = evaluate(ht, solution.placement);
  if (!svg_path.empty()) {
    LedTreeInstance drawable = ht.dim == 2 ? inst : project_to_plane(inst);
    RenderSpec spec;
    spec.projected = ht.dim != 2;
    write_text_file(svg_path, render_svg(drawable, doc.leaf_labels, spec));
  }
  if (!newick_path.empty()) write_text_file(newick_path, to_newick(inst, doc.leaf_labels));

  std::printf("status: %s\n", to_string(solution.status));
  std::printf("length: %.12f\n", solution.length);
  return solution.status == SolveStatus::CertifiedOptimal ? kExitOk : kExitNotCertified;
}

int run_check_kkt(const std::string& input, double tol, const std::string& out_path) {
  TreeDocument doc = read_tree_or_solution_json(input);
  if (!doc.placement)
    throw Error(ErrorCode::InvalidInput, "check-kkt needs inner coordinates in the input");
  LedTreeInstance inst = evaluate(doc.hanging_type, *doc.placement);
  bool certified = false;
  std::string json_text;
  try {
    DualCertificate cert = recover_duals(inst);
    KktReport report = verify_kkt(inst, cert, tol);
    GeometricReport geometry = geometric_checks(inst, tol);
    certified = report.certified;
    json_text = certificate_json_string(cert, report, geometry);
  } catch (const Error& e) {
    // irregular or degenerate instances cannot carry a certificate
    nlohmann::ordered_json doc_json;
    doc_json["verdict"] = "NOT_CERTIFIED";
    doc_json["reason"] = e.what();
    json_text = doc_json.dump(2) + "\n";
  }
  if (!out_path.empty()) write_text_file(out_path, json_text);
  std::printf("%s\n", certified ? "CERTIFIED" : "NOT_CERTIFIED");
  return certified ? kExitOk : kExitNotCertifiedCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"length-minimizing LED trees: solver, certificates and phylogenetic pipeline"};
  app.require_subcommand(1);

  // ---- embed-cognates ----
  auto* embed_cmd = app.add_subcommand("embed-cognates", "cognate TSV -> feature coordinates");
  std::string embed_tsv, embed_weighting = "binary", embed_out = "embedding.json";
  embed_cmd->add_option("--cognates", embed_tsv, "cognate TSV file")->required();
  embed_cmd->add_option("--weighting", embed_weighting, "binary | quartic");
  embed_cmd->add_option("--out", embed_out, "output embedding JSON");

  // ---- infer-topology ----
  auto* infer_cmd = app.add_subcommand("infer-topology",
                                       "feature coordinates -> stretched LED tree");
  std::string infer_embedding, infer_tsv, infer_weighting = "binary",
              infer_out = "tree.json";
  int infer_fallback = 3;
  infer_cmd->add_option("--embedding", infer_embedding, "embedding JSON");
  infer_cmd->add_option("--cognates", infer_tsv, "cognate TSV (embedded on the fly)");
  infer_cmd->add_option("--weighting", infer_weighting, "binary | quartic");
  infer_cmd->add_option("--fallback-width", infer_fallback,
                        "closest pairs tried per agglomeration stage");
  infer_cmd->add_option("--out", infer_out, "output tree JSON");

  // ---- minimize ----
  auto* min_cmd = app.add_subcommand("minimize", "length-minimize a hanging type");
  std::string min_input, min_init = "stretched", min_out = "solution.json", min_svg, min_newick;
  SolverFlags min_flags;
  min_cmd->add_option("--input", min_input, "tree JSON")->required();
  min_cmd->add_option("--init", min_init, "stretched | file");
  min_cmd->add_option("--out", min_out, "output solution JSON");
  min_cmd->add_option("--svg", min_svg, "optional SVG rendering");
  min_cmd->add_option("--newick", min_newick, "optional Newick export");
  min_flags.attach(min_cmd);

  // ---- check-kkt ----
  auto* kkt_cmd = app.add_subcommand("check-kkt", "verify the optimality certificate");
  std::string kkt_input, kkt_out = "certificate.json";
  double kkt_tol = 1e-6;
  kkt_cmd->add_option("--input", kkt_input, "solution JSON (or tree JSON with coords)")
      ->required();
  kkt_cmd->add_option("--tol", kkt_tol, "verification tolerance (relative)");
  kkt_cmd->add_option("--out", kkt_out, "output certificate JSON");

  // ---- feasibility-probe ----
  auto* probe_cmd = app.add_subcommand("feasibility-probe",
                                       "grid probe of the two-parameter feasible regions");
  std::string probe_example, probe_out = "probe";
  double probe_a = 2.0, probe_c = 1.0, probe_range = 10.0;
  int probe_grid = 512;
  probe_cmd
      ->add_option("--example", probe_example,
                   "nested_collinear | shifted_collinear | cross")
      ->required();
  probe_cmd->add_option("--a", probe_a, "leaf half-distance a");
  probe_cmd->add_option("--c", probe_c, "leaf half-distance c (d for shifted_collinear)");
  probe_cmd->add_option("--grid", probe_grid, "grid resolution per axis");
  probe_cmd->add_option("--range", probe_range, "parameter range [-R, R]");
  probe_cmd->add_option("--out", probe_out, "output prefix (.pgm / .json)");

  // ---- date ----
  auto* date_cmd = app.add_subcommand("date", "anchor-based split dating");
  std::string date_input, date_label, date_out = "dated.json";
  int date_vertex = -1;
  double date_years = 0.0;
  date_cmd->add_option("--input", date_input, "solution JSON")->required();
  date_cmd->add_option("--anchor-label", date_label,
                       "comma-separated leaf labels; the anchor is their common ancestor");
  date_cmd->add_option("--anchor-vertex", date_vertex, "anchor by inner vertex id");
  date_cmd->add_option("--anchor-years", date_years, "age of the anchor split")->required();
  date_cmd->add_option("--out", date_out, "output dated JSON");

  // ---- render ----
  auto* render_cmd = app.add_subcommand("render", "render a tree as SVG");
  std::string render_input, render_dates, render_out = "tree.svg";
  bool render_project = false;
  int render_width = 800, render_height = 600;
  render_cmd->add_option("--input", render_input, "tree or solution JSON")->required();
  render_cmd->add_option("--dates", render_dates, "dated JSON for year annotations");
  render_cmd->add_flag("--project", render_project,
                       "principal-axes projection for dimension > 2");
  render_cmd->add_option("--width", render_width, "canvas width");
  render_cmd->add_option("--height", render_height, "canvas height");
  render_cmd->add_option("--out", render_out, "output SVG");

  // ---- pipeline ----
  auto* pipe_cmd = app.add_subcommand(
      "pipeline", "cognates -> embedding -> topology -> minimize -> certificate -> chronogram");
  std::string pipe_tsv, pipe_weighting = "quartic", pipe_label, pipe_out = "pipeline_out";
  double pipe_years = 0.0;
  int pipe_fallback = 3;
  bool pipe_project = false;
  SolverFlags pipe_flags;
  pipe_cmd->add_option("--cognates", pipe_tsv, "cognate TSV file")->required();
  pipe_cmd->add_option("--weighting", pipe_weighting, "binary | quartic");
  pipe_cmd->add_option("--anchor-label", pipe_label, "leaf labels of the dating anchor");
  pipe_cmd->add_option("--anchor-years", pipe_years, "age of the anchor split");
  pipe_cmd->add_option("--fallback-width", pipe_fallback, "agglomeration fallback width");
  pipe_cmd->add_flag("--project", pipe_project, "force projection in the rendering");
  pipe_cmd->add_option("--out", pipe_out, "output directory");
  pipe_flags.attach(pipe_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*embed_cmd) {
      CognateTable table = read_cognate_tsv(embed_tsv);
      FeatureEmbedding emb = embed_cognates(table, parse_weighting(embed_weighting));
      write_text_file(embed_out, embedding_json_string(emb));
      std::printf("embedded %d languages into %d coordinates (c_max=%d)\n",
                  static_cast<int>(emb.coords.rows()), static_cast<int>(emb.coords.cols()),
                  emb.c_max);
      return kExitOk;
    }

    if (*infer_cmd) {
      FeatureEmbedding emb;
      if (!infer_embedding.empty()) {
        emb = read_embedding_json(infer_embedding);
      } else if (!infer_tsv.empty()) {
        emb = embed_cognates(read_cognate_tsv(infer_tsv), parse_weighting(infer_weighting));
      } else {
        throw Error(ErrorCode::InvalidInput, "need --embedding or --cognates");
      }
      ReembedResult re = simplex_reembed(emb);
      InferredType inf = infer_hanging_type(re.points, emb.languages, infer_fallback);
      write_tree_json(infer_out, inf.hanging_type, inf.leaf_labels, &inf.placement);
      std::printf("inferred a %d-leaf hanging type in R^%d -> %s\n",
                  inf.hanging_type.topology.leaf_count, inf.hanging_type.dim,
                  infer_out.c_str());
      return kExitOk;
    }

    if (*min_cmd) {
      TreeDocument doc = read_tree_json(min_input);
      Solution solution;
      return run_minimize_common(doc, min_flags, min_init, min_out, min_svg, min_newick,
                                 solution);
    }

    if (*kkt_cmd) return run_check_kkt(kkt_input, kkt_tol, kkt_out);

    if (*probe_cmd) {
      PairRegionExample example = parse_pair_region_example(probe_example);
      PairRegionParams params{probe_a, probe_c};
      GridProbeResult probe = grid_probe(example, params, probe_grid, probe_range);
      BoundaryCurve curve = pair_region_boundary(example, params);
      write_pgm(probe_out + ".pgm", probe);
      const std::string summary = probe_json_string(example, params, curve, probe);
      write_text_file(probe_out + ".json", summary);
      std::fputs(summary.c_str(), stdout);
      return kExitOk;
    }

    if (*date_cmd) {
      TreeDocument doc = read_tree_or_solution_json(date_input);
      if (!doc.placement)
        throw Error(ErrorCode::InvalidInput, "date needs inner coordinates in the input");
      LedTreeInstance inst = evaluate(doc.hanging_type, *doc.placement);
      const int anchor = resolve_anchor(doc, date_label, date_vertex);
      std::vector<double> years = date_splits(inst, anchor, date_years);
      write_text_file(date_out, dated_json_string(inst, doc.leaf_labels, years, anchor,
                                                  date_years));
      std::printf("anchor vertex %d at %.1f years; root dated %.1f\n", anchor, date_years,
                  years[static_cast<size_t>(doc.hanging_type.topology.root)]);
      return kExitOk;
    }

    if (*render_cmd) {
      TreeDocument doc = read_tree_or_solution_json(render_input);
      if (!doc.placement)
        throw Error(ErrorCode::InvalidInput, "render needs inner coordinates in the input");
      LedTreeInstance inst = evaluate(doc.hanging_type, *doc.placement);
      RenderSpec spec;
      spec.width = render_width;
      spec.height = render_height;
      if (!render_dates.empty()) {
        spec.years = years_from_dated_json(render_dates,
                                           doc.hanging_type.topology.vertex_count());
        spec.annotate_years = true;
      }
      if (doc.hanging_type.dim != 2) {
        if (!render_project)
          throw Error(ErrorCode::DimensionUnsupported,
                      "input lives in R^" + std::to_string(doc.hanging_type.dim) +
                          "; pass --project for a principal-axes drawing");
        inst = project_to_plane(inst);
        spec.projected = true;
      }
      write_text_file(render_out, render_svg(inst, doc.leaf_labels, spec));
      std::printf("wrote %s\n", render_out.c_str());
      return kExitOk;
    }

    if (*pipe_cmd) {
      fs::create_directories(pipe_out);
      const auto path = [&](const char* name) { return (fs::path(pipe_out) / name).string(); };

      CognateTable table = read_cognate_tsv(pipe_tsv);
      FeatureEmbedding emb = embed_cognates(table, parse_weighting(pipe_weighting));
      write_text_file(path("embedding.json"), embedding_json_string(emb));

      ReembedResult re = simplex_reembed(emb);
      InferredType inf = infer_hanging_type(re.points, emb.languages, pipe_fallback);
      write_tree_json(path("tree.json"), inf.hanging_type, inf.leaf_labels, &inf.placement);
      std::printf("[1/5] inferred topology for %d languages\n",
                  inf.hanging_type.topology.leaf_count);

      Solution solution = minimize(inf.hanging_type, inf.placement, pipe_flags.options());
      if (solution.status == SolveStatus::Infeasible) {
        std::printf("[2/5] minimize: %s\n", to_string(solution.status));
        return kExitInfeasible;
      }
      write_solution_json(path("solution.json"), inf.hanging_type, inf.leaf_labels, solution);
      std::printf("[2/5] minimize: %s, length %.9f\n", to_string(solution.status),
                  solution.length);

      LedTreeInstance inst = evaluate(inf.hanging_type, solution.placement);
      bool certified = false;
      try {
        DualCertificate cert = recover_duals(inst);
        KktReport report = verify_kkt(inst, cert, pipe_flags.tol_stat);
        GeometricReport geometry = geometric_checks(inst, pipe_flags.tol_stat);
        certified = report.certified;
        write_text_file(path("certificate.json"),
                        certificate_json_string(cert, report, geometry));
      } catch (const Error& e) {
        nlohmann::ordered_json reason;
        reason["verdict"] = "NOT_CERTIFIED";
        reason["reason"] = e.what();
        write_text_file(path("certificate.json"), reason.dump(2) + "\n");
      }
      std::printf("[3/5] certificate: %s\n", certified ? "CERTIFIED" : "NOT_CERTIFIED");

      RenderSpec spec;
      if (!pipe_label.empty() && pipe_years > 0.0) {
        TreeDocument doc;
        doc.hanging_type = inf.hanging_type;
        doc.leaf_labels = inf.leaf_labels;
        const int anchor = resolve_anchor(doc, pipe_label, -1);
        std::vector<double> years = date_splits(inst, anchor, pipe_years);
        write_text_file(path("dated.json"),
                        dated_json_string(inst, inf.leaf_labels, years, anchor, pipe_years));
        spec.years = years;
        spec.annotate_years = true;
        std::printf("[4/5] dated splits against anchor vertex %d\n", anchor);
      } else {
        std::printf("[4/5] dating skipped (no anchor)\n");
      }

      LedTreeInstance drawable = inst;
      if (inf.hanging_type.dim != 2) {
        drawable = project_to_plane(inst);
        spec.projected = true;
      } else if (pipe_project) {
        spec.projected = true;  // projection requested explicitly; 2D is a no-op
      }
      write_text_file(path("chronogram.svg"), render_svg(drawable, inf.leaf_labels, spec));
      std::printf("[5/5] chronogram -> %s\n", path("chronogram.svg").c_str());
      return certified ? kExitOk : kExitNotCertified;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
