#pragma once

#include <string>
#include <vector>

#include "travshacl/schema.hpp"

namespace travshacl {

enum class EdgeSign { kPositive, kNegative };

struct DependencyEdge {
  std::string from;
  std::string to;
  EdgeSign sign = EdgeSign::kPositive;
  friend bool operator==(const DependencyEdge&, const DependencyEdge&) = default;
  friend auto operator<=>(const DependencyEdge&, const DependencyEdge&) = default;
};

/// Directed graph over shape names: an edge `from -> to` exists when a
/// constraint of `from` references `to`.
///
/// An edge is negative when the reference is non-monotone in the verdicts of
/// `to`: a negated reference under `min`, or a plain reference under `max`
/// (`max n p.T` is `not min n+1 p.T`). A negated reference under `max` is
/// monotone again but still reads the complement of `to`, so it is negative
/// as well. Only `min` over a plain reference yields a positive edge.
///
/// Edges are kept in discovery order (shape declaration order, then
/// constraint order) with duplicates per (from, to, sign) collapsed.
class DependencyGraph {
 public:
  std::vector<std::string> nodes;
  std::vector<DependencyEdge> edges;

  bool has_edge(const std::string& from, const std::string& to, EdgeSign sign) const;
  // Edge count after collapsing signs: distinct (from, to) pairs.
  std::size_t unsigned_edge_count() const;
};

EdgeSign reference_sign(const Constraint& c);

DependencyGraph build_dependency_graph(const ShapeSchema& schema);

/// Orders the strongly connected components of the graph so that every shape
/// comes after the shapes it references. Strata are ordered dependencies
/// first; ties between independent components follow declaration order.
/// Names inside a stratum keep declaration order.
///
/// Throws NegativeCycleError when a negative edge lies on a cycle.
std::vector<std::vector<std::string>> stratify(const DependencyGraph& graph);

}  // namespace travshacl
