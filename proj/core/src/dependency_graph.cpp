#include "travshacl/dependency_graph.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "travshacl/errors.hpp"

namespace travshacl {

bool DependencyGraph::has_edge(const std::string& from, const std::string& to,
                               EdgeSign sign) const {
  return std::find(edges.begin(), edges.end(), DependencyEdge{from, to, sign}) !=
         edges.end();
}

std::size_t DependencyGraph::unsigned_edge_count() const {
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& e : edges) pairs.emplace(e.from, e.to);
  return pairs.size();
}

EdgeSign reference_sign(const Constraint& c) {
  const bool monotone =
      c.kind == ConstraintKind::kMin && c.shape_ref && !c.shape_ref->negated;
  return monotone ? EdgeSign::kPositive : EdgeSign::kNegative;
}

DependencyGraph build_dependency_graph(const ShapeSchema& schema) {
  DependencyGraph g;
  for (const auto& s : schema.shapes()) g.nodes.push_back(s.name);
  for (const auto& s : schema.shapes()) {
    for (const auto& c : s.constraints) {
      if (!c.shape_ref) continue;
      DependencyEdge e{s.name, c.shape_ref->shape, reference_sign(c)};
      if (std::find(g.edges.begin(), g.edges.end(), e) == g.edges.end()) {
        g.edges.push_back(std::move(e));
      }
    }
  }
  return g;
}

std::vector<std::vector<std::string>> stratify(const DependencyGraph& graph) {
  const std::size_t n = graph.nodes.size();
  std::vector<std::vector<std::size_t>> out(n);
  auto index_of = [&](const std::string& name) {
    const auto it = std::find(graph.nodes.begin(), graph.nodes.end(), name);
    if (it == graph.nodes.end()) throw SchemaError("edge to unknown shape '" + name + "'");
    return static_cast<std::size_t>(it - graph.nodes.begin());
  };
  for (const auto& e : graph.edges) out[index_of(e.from)].push_back(index_of(e.to));

  // Tarjan's algorithm.
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0, ncomp = 0;
  std::function<void(std::size_t)> connect = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : out[v]) {
      if (index[w] == kUnset) {
        connect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = ncomp;
      } while (w != v);
      ++ncomp;
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] == kUnset) connect(v);
  }

  std::vector<std::vector<std::size_t>> members(ncomp);
  for (std::size_t v = 0; v < n; ++v) members[comp[v]].push_back(v);

  for (const auto& e : graph.edges) {
    if (e.sign != EdgeSign::kNegative) continue;
    const std::size_t c = comp[index_of(e.from)];
    if (c == comp[index_of(e.to)]) {
      std::vector<std::string> cycle;
      for (std::size_t v : members[c]) cycle.push_back(graph.nodes[v]);
      throw NegativeCycleError(std::move(cycle));
    }
  }

  // Kahn over the condensation: a component is ready once every component it
  // references has been emitted.
  std::vector<std::set<std::size_t>> deps(ncomp);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w : out[v]) {
      if (comp[v] != comp[w]) deps[comp[v]].insert(comp[w]);
    }
  }
  std::vector<bool> emitted(ncomp, false);
  std::vector<std::vector<std::string>> strata;
  for (std::size_t round = 0; round < ncomp; ++round) {
    std::size_t best = kUnset;
    for (std::size_t c = 0; c < ncomp; ++c) {
      if (emitted[c]) continue;
      const bool ready = std::all_of(deps[c].begin(), deps[c].end(),
                                     [&](std::size_t d) { return emitted[d]; });
      if (ready && (best == kUnset || members[c].front() < members[best].front())) {
        best = c;
      }
    }
    emitted[best] = true;
    std::vector<std::string> names;
    for (std::size_t v : members[best]) names.push_back(graph.nodes[v]);
    strata.push_back(std::move(names));
  }
  return strata;
}

}  // namespace travshacl
