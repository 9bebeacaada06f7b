#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ledtree/tree.hpp"

namespace ledtree {

enum class SolveMethod { RelaxationInterior, PenaltyDescent };

SolveMethod parse_solve_method(const std::string& name);
const char* to_string(SolveMethod method);

struct SolveOptions {
  double tol_feas = 1e-9;  // scaled by (1 + total length)
  double tol_stat = 1e-6;  // scaled by the mean edge length
  int max_iterations = 600;
  int restarts = 4;
  std::uint64_t seed = 0;
  SolveMethod method = SolveMethod::RelaxationInterior;
  double restart_perturbation = 0.1;  // relative sheet offset of restart inits
  bool concurrent_restarts = true;
};

enum class SolveStatus { CertifiedOptimal, StationaryUncertified, NoStationaryPoint, Infeasible };

const char* to_string(SolveStatus status);

struct RestartSummary {
  int index = 0;
  SolveStatus status = SolveStatus::Infeasible;
  double length = 0.0;
  int newton_iterations = 0;
  Placement placement;
};

struct Solution {
  Placement placement;
  Eigen::VectorXd relaxed_lengths;  // z, one per edge
  double length = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  bool hit_regularity_boundary = false;
  double stationarity_defect = 0.0;
  double max_residual = 0.0;
  double max_slack = 0.0;  // max over edges of z_j - lambda_j at the relaxation optimum
  double min_multiplier = 0.0;
  int newton_iterations = 0;
  std::vector<RestartSummary> restarts;
};

/// Places every inner vertex on the segment joining its children at the
/// equal-depth point, bottom-up. Throws StretchInfeasible (carrying the
/// blocking vertex) when some merge admits no parent position.
Placement stretched_tree(const HangingType& ht);

/// Stretched construction with every vertex displaced along its own sheet by
/// a seeded random offset of roughly `relative` times the local scale. The
/// result is exactly feasible.
Placement perturbed_stretched_tree(const HangingType& ht, std::uint64_t seed, double relative);

/// Gauss-Newton descent on the squared LED residuals from the given start;
/// returns a feasible placement or nullopt when the iteration stalls.
std::optional<Placement> restore_feasibility(const HangingType& ht, const Placement& start);

/// Minimizes total length over the feasible set of the hanging type. Runs
/// `options.restarts` solves from perturbed initializations and merges the
/// results; the status reflects certificate verification. Throws
/// NonConvergence only when every restart hits the iteration cap.
Solution minimize(const HangingType& ht, const Placement& init, const SolveOptions& options = {});
Solution minimize(const HangingType& ht, const SolveOptions& options = {});

/// Solves the convex relaxation (slack edge lengths z with sum(z) minimized,
/// linear equal-depth constraints on z, lambda_j(beta) <= z_j) by a primal
/// log-barrier interior method. Returns the relaxation-feasible pair.
std::pair<Placement, Eigen::VectorXd> solve_relaxation(const HangingType& ht,
                                                       const Placement& init,
                                                       const SolveOptions& options = {});

struct OracleGrid {
  double range = 3.0;      // transverse offset range per constrained vertex
  int points = 121;        // samples per parameter
  int refine_rounds = 3;   // local refinements around the best cell
  int root_offsets = 0;    // extra off-segment root samples per grid point
};

struct OracleSolution {
  Placement placement;
  double length = 0.0;
  long feasible_count = 0;
};

/// Exhaustive search over the feasible-set parametrization for planar
/// instances with at most four leaves: every non-root inner vertex is
/// sampled along its constraint locus, the root is placed at the equal-depth
/// segment point. Throws EmptyFeasibleGrid when no sampled point is feasible.
OracleSolution brute_force_oracle(const HangingType& ht, const OracleGrid& grid = {});

/// Enumerates sampled feasible placements (including off-segment root
/// positions when grid.root_offsets > 0), invoking the callback with the
/// exact tree length of each.
void oracle_enumerate(const HangingType& ht, const OracleGrid& grid,
                      const std::function<void(double, const Placement&)>& visit);

}  // namespace ledtree
