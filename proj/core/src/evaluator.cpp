#include <algorithm>
#include <map>
#include <set>

#include "travshacl/errors.hpp"
#include "travshacl/graph.hpp"

namespace travshacl {

namespace {

using Id = Graph::Id;

struct VarInfo {
  Variable var;
  bool projected = false;
  // Patterns binding this variable as object, by predicate id.
  std::vector<Id> predicates;
  std::vector<Id> equals;          // equality tests (resolved ids)
  bool impossible_equals = false;  // equality with a term absent from the graph
  std::vector<std::string> datatypes;
  const InstanceFilter* include = nullptr;
  std::vector<const InstanceFilter*> excludes;
  std::set<Id> include_ids;
  std::set<Id> exclude_ids;
};

class StarEvaluator {
 public:
  StarEvaluator(const Graph& g, const SelectQuery& q) : g_(g), q_(q) {}

  ResultSet run() {
    ResultSet out;
    out.variables = q_.projected;
    if (!prepare()) return out;

    if (q_.patterns.empty()) {
      values_only(out);
      return out;
    }

    std::vector<Id> candidates = subject_candidates();
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::set<std::vector<Id>> tuples;
    std::vector<std::vector<Id>> domains(vars_.size());
    for (Id x : candidates) {
      if (!bind_subject(x, domains)) continue;
      collect(domains, tuples);
    }
    out.rows.reserve(tuples.size());
    for (const auto& t : tuples) {
      std::vector<Term> row;
      row.reserve(projection_.size());
      for (std::size_t idx : projection_) row.push_back(g_.term(t[idx]));
      out.rows.push_back(std::move(row));
    }
    std::sort(out.rows.begin(), out.rows.end());
    return out;
  }

 private:
  std::size_t var_index(const Variable& v) {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i].var == v) return i;
    }
    VarInfo info;
    info.var = v;
    vars_.push_back(std::move(info));
    return vars_.size() - 1;
  }

  // Resolves constants; returns false when the query cannot match anything.
  bool prepare() {
    subject_ = var_index(q_.subject());
    for (const auto& p : q_.patterns) {
      const auto pid = g_.id_of(p.predicate);
      if (p.subject != q_.subject()) throw QueryError("non-star pattern");
      if (const auto* v = std::get_if<Variable>(&p.object)) {
        const std::size_t vi = var_index(*v);
        if (!pid) return false;
        vars_[vi].predicates.push_back(*pid);
      } else {
        const auto oid = g_.id_of(std::get<Term>(p.object));
        if (!pid || !oid) return false;
        constants_.emplace_back(*pid, *oid);
      }
    }
    for (const auto& t : q_.value_tests) {
      VarInfo& vi = vars_[var_index(t.var)];
      if (t.kind == ValueTest::Kind::kEquals) {
        const auto id = g_.id_of(t.value);
        if (id) vi.equals.push_back(*id);
        else vi.impossible_equals = true;
      } else {
        vi.datatypes.push_back(t.value.iri_value());
      }
    }
    for (const auto& f : q_.filters) {
      VarInfo& vi = vars_[var_index(f.var)];
      if (f.mode == FilterMode::kInclude) {
        if (vi.include) throw QueryError("two VALUES blocks on ?" + f.var.name);
        vi.include = &f;
        for (const auto& e : f.entities) {
          if (const auto id = g_.id_of(e)) vi.include_ids.insert(*id);
        }
      } else {
        vi.excludes.push_back(&f);
        for (const auto& e : f.entities) {
          if (const auto id = g_.id_of(e)) vi.exclude_ids.insert(*id);
        }
      }
    }
    for (const auto& [a, b] : q_.inequalities) {
      inequalities_.emplace_back(var_index(a), var_index(b));
    }
    for (const auto& v : q_.projected) {
      const std::size_t i = var_index(v);
      vars_[i].projected = true;
      projection_.push_back(i);
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i].impossible_equals) return false;
      if (i != subject_ && vars_[i].predicates.empty() && !vars_[i].include) {
        throw QueryError("variable ?" + vars_[i].var.name + " is not bound by any pattern");
      }
    }
    // Assignment order: subject, projected, the rest.
    order_.push_back(subject_);
    for (std::size_t i : projection_) {
      if (i != subject_ && std::find(order_.begin(), order_.end(), i) == order_.end()) {
        order_.push_back(i);
      }
    }
    projected_prefix_ = order_.size();
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (std::find(order_.begin(), order_.end(), i) == order_.end()) order_.push_back(i);
    }
    return true;
  }

  bool admits(const VarInfo& vi, Id id) const {
    if (vi.include && !vi.include_ids.contains(id)) return false;
    if (vi.exclude_ids.contains(id)) return false;
    for (Id e : vi.equals) {
      if (e != id) return false;
    }
    if (!vi.datatypes.empty()) {
      const Term& t = g_.term(id);
      if (!t.is_literal()) return false;
      const std::string dt = t.datatype();
      for (const auto& d : vi.datatypes) {
        if (d != dt) return false;
      }
    }
    return true;
  }

  std::vector<Id> subject_candidates() const {
    const VarInfo& x = vars_[subject_];
    if (x.include) return {x.include_ids.begin(), x.include_ids.end()};
    std::span<const Id> best;
    bool have = false;
    for (const auto& [p, o] : constants_) {
      const auto s = g_.subjects(p, o);
      if (!have || s.size() < best.size()) {
        best = s;
        have = true;
      }
    }
    for (const auto& vi : vars_) {
      for (Id p : vi.predicates) {
        const auto s = g_.subjects_with(p);
        if (!have || s.size() < best.size()) {
          best = s;
          have = true;
        }
      }
    }
    return {best.begin(), best.end()};
  }

  bool bind_subject(Id x, std::vector<std::vector<Id>>& domains) const {
    if (!admits(vars_[subject_], x)) return false;
    for (const auto& [p, o] : constants_) {
      const auto objs = g_.objects(p, x);
      if (std::find(objs.begin(), objs.end(), o) == objs.end()) return false;
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      auto& dom = domains[i];
      dom.clear();
      if (i == subject_) {
        dom.push_back(x);
        // ?x <p> ?x
        for (Id p : vars_[i].predicates) {
          const auto objs = g_.objects(p, x);
          if (std::find(objs.begin(), objs.end(), x) == objs.end()) return false;
        }
        continue;
      }
      const VarInfo& vi = vars_[i];
      if (vi.predicates.empty()) {
        for (Id id : vi.include_ids) {
          if (admits(vi, id)) dom.push_back(id);
        }
      } else {
        const auto first = g_.objects(vi.predicates.front(), x);
        for (Id id : first) {
          if (!admits(vi, id)) continue;
          bool all = true;
          for (std::size_t k = 1; k < vi.predicates.size() && all; ++k) {
            const auto objs = g_.objects(vi.predicates[k], x);
            all = std::find(objs.begin(), objs.end(), id) != objs.end();
          }
          if (all) dom.push_back(id);
        }
      }
      if (dom.empty()) return false;
    }
    return true;
  }

  bool consistent(const std::vector<Id>& assign, const std::vector<bool>& bound,
                  std::size_t just) const {
    for (const auto& [a, b] : inequalities_) {
      if ((a == just && bound[b]) || (b == just && bound[a])) {
        if (assign[a] == assign[b]) return false;
      }
    }
    return true;
  }

  bool exists_rest(std::size_t depth, const std::vector<std::vector<Id>>& domains,
                   std::vector<Id>& assign, std::vector<bool>& bound) const {
    if (depth == order_.size()) return true;
    const std::size_t v = order_[depth];
    for (Id id : domains[v]) {
      assign[v] = id;
      bound[v] = true;
      if (consistent(assign, bound, v) && exists_rest(depth + 1, domains, assign, bound)) {
        bound[v] = false;
        return true;
      }
      bound[v] = false;
    }
    return false;
  }

  void enumerate(std::size_t depth, const std::vector<std::vector<Id>>& domains,
                 std::vector<Id>& assign, std::vector<bool>& bound,
                 std::set<std::vector<Id>>& tuples) const {
    if (depth == projected_prefix_) {
      if (exists_rest(depth, domains, assign, bound)) tuples.insert(assign);
      return;
    }
    const std::size_t v = order_[depth];
    for (Id id : domains[v]) {
      assign[v] = id;
      bound[v] = true;
      if (consistent(assign, bound, v)) enumerate(depth + 1, domains, assign, bound, tuples);
      bound[v] = false;
    }
  }

  void collect(const std::vector<std::vector<Id>>& domains,
               std::set<std::vector<Id>>& tuples) const {
    std::vector<Id> assign(vars_.size(), 0);
    std::vector<bool> bound(vars_.size(), false);
    std::set<std::vector<Id>> local;
    enumerate(0, domains, assign, bound, local);
    // Keep only projected positions so unprojected bindings do not split rows.
    for (const auto& a : local) {
      std::vector<Id> t(vars_.size(), 0);
      for (std::size_t i : projection_) t[i] = a[i];
      tuples.insert(std::move(t));
    }
  }

  // A query without patterns: the cross product of VALUES lists.
  void values_only(ResultSet& out) const {
    std::vector<std::vector<Term>> rows{{}};
    for (std::size_t i : projection_) {
      const VarInfo& vi = vars_[i];
      if (!vi.include) throw QueryError("variable ?" + vi.var.name + " is unbound");
      std::set<Term> values;
      for (const auto& e : vi.include->entities) {
        const auto id = g_.id_of(e);
        if (id && !admits(vi, *id)) continue;
        if (!id && (!vi.equals.empty() || !vi.datatypes.empty())) continue;
        values.insert(e);
      }
      std::vector<std::vector<Term>> next;
      for (const auto& r : rows) {
        for (const auto& v : values) {
          auto nr = r;
          nr.push_back(v);
          next.push_back(std::move(nr));
        }
      }
      rows = std::move(next);
    }
    out.rows = std::move(rows);
    std::sort(out.rows.begin(), out.rows.end());
  }

  const Graph& g_;
  const SelectQuery& q_;
  std::vector<VarInfo> vars_;
  std::size_t subject_ = 0;
  std::vector<std::pair<Id, Id>> constants_;
  std::vector<std::pair<std::size_t, std::size_t>> inequalities_;
  std::vector<std::size_t> projection_;
  std::vector<std::size_t> order_;
  std::size_t projected_prefix_ = 0;
};

}  // namespace

ResultSet evaluate_unbounded(const Graph& graph, const SelectQuery& query) {
  return StarEvaluator(graph, query).run();
}

}  // namespace travshacl
