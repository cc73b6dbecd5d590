#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "travshacl/dependency_graph.hpp"
#include "travshacl/schema.hpp"

namespace travshacl {

enum class TraversalStrategy { kBfs, kDfs, kRandom };
enum class SeedConnectivity { kHighInDegree, kHighOutDegree };
enum class ConstraintTiebreak { kMany, kFew };

struct PlannerConfig {
  TraversalStrategy strategy = TraversalStrategy::kDfs;
  SeedConnectivity connectivity = SeedConnectivity::kHighInDegree;
  ConstraintTiebreak tiebreak = ConstraintTiebreak::kMany;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const PlannerConfig&, const PlannerConfig&) = default;
};

/// The eight deterministic strategy/degree/tiebreak combinations in the
/// conventional numbering (BFS first, in-degree before out-degree, many before
/// few) followed by the random strategy.
std::vector<PlannerConfig> standard_configurations(std::uint64_t rng_seed = 0);
std::string describe(const PlannerConfig& config);

TraversalStrategy parse_strategy(std::string_view s);
SeedConnectivity parse_connectivity(std::string_view s);
ConstraintTiebreak parse_tiebreak(std::string_view s);

struct Degree {
  std::size_t in = 0;
  std::size_t out = 0;
  friend bool operator==(const Degree&, const Degree&) = default;
};

std::map<std::string, Degree> degree_stats(const DependencyGraph& graph);

struct SeedChoice {
  std::string shape;
  // Which rule decided: "single candidate", "degree", "constraint count" or
  // "name".
  std::string decided_by;
  std::vector<std::string> candidates;
};

/// Picks the traversal seed among targeted shapes. Throws PlanningError
/// (NoTargetedShape) when no shape has a target.
SeedChoice select_seed_explained(const ShapeSchema& schema, const DependencyGraph& graph,
                                 const PlannerConfig& config);
std::string select_seed(const ShapeSchema& schema, const DependencyGraph& graph,
                        const PlannerConfig& config);

struct TraversalStats {
  std::size_t nodes_expanded = 0;
  std::size_t edges_touched = 0;
};

struct TraversalPlan {
  std::vector<std::string> order;
  std::string seed;
  PlannerConfig config;
};

/// Enumerates all shapes starting at `seed`, ignoring edge directions.
/// Neighbours are visited in adjacency order (shape declaration order, then
/// constraint order); when a search exhausts its component it restarts at the
/// first unvisited shape in declaration order. The random strategy ignores
/// `seed` and shuffles the node list with `config.rng_seed`.
TraversalPlan traversal_order(const DependencyGraph& graph, const std::string& seed,
                              const PlannerConfig& config,
                              TraversalStats* stats = nullptr);

/// Seed selection plus traversal in one call.
TraversalPlan plan_traversal(const ShapeSchema& schema, const PlannerConfig& config);

/// Declaration order, used by the baseline mode.
TraversalPlan declaration_order(const ShapeSchema& schema);

}  // namespace travshacl
