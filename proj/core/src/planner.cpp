#include "travshacl/planner.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <random>
#include <set>

#include "travshacl/errors.hpp"

namespace travshacl {

std::vector<PlannerConfig> standard_configurations(std::uint64_t rng_seed) {
  std::vector<PlannerConfig> out;
  for (auto strategy : {TraversalStrategy::kBfs, TraversalStrategy::kDfs}) {
    for (auto conn : {SeedConnectivity::kHighInDegree, SeedConnectivity::kHighOutDegree}) {
      for (auto tie : {ConstraintTiebreak::kMany, ConstraintTiebreak::kFew}) {
        out.push_back({strategy, conn, tie, rng_seed});
      }
    }
  }
  out.push_back({TraversalStrategy::kRandom, SeedConnectivity::kHighInDegree,
                 ConstraintTiebreak::kMany, rng_seed});
  return out;
}

std::string describe(const PlannerConfig& c) {
  if (c.strategy == TraversalStrategy::kRandom) {
    return "random(seed=" + std::to_string(c.rng_seed) + ")";
  }
  std::string s = c.strategy == TraversalStrategy::kBfs ? "bfs" : "dfs";
  s += c.connectivity == SeedConnectivity::kHighInDegree ? "/in" : "/out";
  s += c.tiebreak == ConstraintTiebreak::kMany ? "/many" : "/few";
  return s;
}

TraversalStrategy parse_strategy(std::string_view s) {
  if (s == "bfs") return TraversalStrategy::kBfs;
  if (s == "dfs") return TraversalStrategy::kDfs;
  if (s == "random") return TraversalStrategy::kRandom;
  throw Error("unknown strategy '" + std::string(s) + "'");
}

SeedConnectivity parse_connectivity(std::string_view s) {
  if (s == "in") return SeedConnectivity::kHighInDegree;
  if (s == "out") return SeedConnectivity::kHighOutDegree;
  throw Error("unknown seed degree '" + std::string(s) + "'");
}

ConstraintTiebreak parse_tiebreak(std::string_view s) {
  if (s == "many") return ConstraintTiebreak::kMany;
  if (s == "few") return ConstraintTiebreak::kFew;
  throw Error("unknown constraint tiebreak '" + std::string(s) + "'");
}

std::map<std::string, Degree> degree_stats(const DependencyGraph& graph) {
  std::map<std::string, Degree> out;
  for (const auto& n : graph.nodes) out[n];
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : graph.edges) {
    if (!seen.emplace(e.from, e.to).second) continue;
    ++out[e.from].out;
    ++out[e.to].in;
  }
  return out;
}

SeedChoice select_seed_explained(const ShapeSchema& schema, const DependencyGraph& graph,
                                 const PlannerConfig& config) {
  const auto degrees = degree_stats(graph);
  std::vector<const Shape*> candidates;
  for (const auto& s : schema.shapes()) {
    if (s.target) candidates.push_back(&s);
  }
  if (candidates.empty()) {
    throw PlanningError("NoTargetedShape: no shape has a target definition");
  }
  SeedChoice choice;
  for (const auto* s : candidates) choice.candidates.push_back(s->name);
  if (candidates.size() == 1) {
    choice.shape = candidates.front()->name;
    choice.decided_by = "single candidate";
    return choice;
  }

  auto degree = [&](const Shape* s) {
    const Degree& d = degrees.at(s->name);
    return config.connectivity == SeedConnectivity::kHighInDegree ? d.in : d.out;
  };
  std::size_t best_degree = 0;
  for (const auto* s : candidates) best_degree = std::max(best_degree, degree(s));
  std::erase_if(candidates, [&](const Shape* s) { return degree(s) != best_degree; });
  if (candidates.size() == 1) {
    choice.shape = candidates.front()->name;
    choice.decided_by = "degree";
    return choice;
  }

  const bool many = config.tiebreak == ConstraintTiebreak::kMany;
  std::size_t best_count = many ? 0 : static_cast<std::size_t>(-1);
  for (const auto* s : candidates) {
    best_count = many ? std::max(best_count, s->constraints.size())
                      : std::min(best_count, s->constraints.size());
  }
  std::erase_if(candidates,
                [&](const Shape* s) { return s->constraints.size() != best_count; });
  if (candidates.size() == 1) {
    choice.shape = candidates.front()->name;
    choice.decided_by = "constraint count";
    return choice;
  }

  const auto it = std::min_element(candidates.begin(), candidates.end(),
                                   [](const Shape* a, const Shape* b) { return a->name < b->name; });
  choice.shape = (*it)->name;
  choice.decided_by = "name";
  return choice;
}

std::string select_seed(const ShapeSchema& schema, const DependencyGraph& graph,
                        const PlannerConfig& config) {
  return select_seed_explained(schema, graph, config).shape;
}

namespace {

// Uniform integer in [0, bound) from a 64-bit engine; rejection sampling keeps
// results identical across standard library implementations.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

TraversalPlan traversal_order(const DependencyGraph& graph, const std::string& seed,
                              const PlannerConfig& config, TraversalStats* stats) {
  TraversalPlan plan;
  plan.config = config;
  const std::size_t n = graph.nodes.size();

  if (config.strategy == TraversalStrategy::kRandom) {
    plan.order = graph.nodes;
    std::mt19937_64 rng(config.rng_seed);
    for (std::size_t i = n; i > 1; --i) {
      std::swap(plan.order[i - 1], plan.order[uniform_below(rng, i)]);
    }
    if (!plan.order.empty()) plan.seed = plan.order.front();
    return plan;
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[graph.nodes[i]] = i;
  const auto seed_it = index.find(seed);
  if (seed_it == index.end()) throw PlanningError("unknown seed shape '" + seed + "'");

  std::vector<std::vector<std::size_t>> adj(n);
  auto link = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    if (std::find(adj[a].begin(), adj[a].end(), b) == adj[a].end()) adj[a].push_back(b);
  };
  for (const auto& e : graph.edges) {
    const std::size_t a = index.at(e.from), b = index.at(e.to);
    link(a, b);
    link(b, a);
  }

  TraversalStats local;
  std::vector<bool> visited(n, false);
  std::size_t restart_cursor = 0;
  auto next_unvisited = [&]() -> std::size_t {
    while (restart_cursor < n && visited[restart_cursor]) ++restart_cursor;
    return restart_cursor;
  };
  auto visit = [&](std::size_t v) {
    visited[v] = true;
    plan.order.push_back(graph.nodes[v]);
  };

  std::size_t start = seed_it->second;
  while (start < n) {
    visit(start);
    if (config.strategy == TraversalStrategy::kDfs) {
      // (node, position in its adjacency list)
      std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
      ++local.nodes_expanded;
      while (!stack.empty()) {
        auto& [v, pos] = stack.back();
        if (pos == adj[v].size()) {
          stack.pop_back();
          continue;
        }
        const std::size_t w = adj[v][pos++];
        ++local.edges_touched;
        if (!visited[w]) {
          visit(w);
          ++local.nodes_expanded;
          stack.emplace_back(w, 0);
        }
      }
    } else {
      std::deque<std::size_t> queue{start};
      while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        ++local.nodes_expanded;
        for (std::size_t w : adj[v]) {
          ++local.edges_touched;
          if (!visited[w]) {
            visit(w);
            queue.push_back(w);
          }
        }
      }
    }
    start = next_unvisited();
  }
  plan.seed = seed;
  if (stats) *stats = local;
  return plan;
}

TraversalPlan plan_traversal(const ShapeSchema& schema, const PlannerConfig& config) {
  const DependencyGraph graph = build_dependency_graph(schema);
  if (config.strategy == TraversalStrategy::kRandom) {
    return traversal_order(graph, {}, config);
  }
  if (schema.empty()) return TraversalPlan{{}, {}, config};
  return traversal_order(graph, select_seed(schema, graph, config), config);
}

TraversalPlan declaration_order(const ShapeSchema& schema) {
  TraversalPlan plan;
  for (const auto& s : schema.shapes()) plan.order.push_back(s.name);
  if (!plan.order.empty()) plan.seed = plan.order.front();
  return plan;
}

}  // namespace travshacl
