#include "travshacl/query_builder.hpp"

#include <algorithm>
#include <map>

#include "travshacl/errors.hpp"

namespace travshacl {

namespace {

const Variable kSubject{"x"};

// Starts a query over the scope of a shape: either its target patterns or an
// essential VALUES list on ?x.
SelectQuery scoped_base(const Shape& shape, const QueryScope& scope) {
  SelectQuery q;
  q.set_subject(kSubject);
  q.projected.push_back(kSubject);
  if (scope.entities) {
    q.filters.push_back(
        InstanceFilter{kSubject, FilterMode::kInclude, *scope.entities, shape.name, true});
    return q;
  }
  if (!shape.target) {
    throw QueryError("shape '" + shape.name + "' has no target definition");
  }
  if (shape.target->is_class()) {
    q.patterns.push_back(
        TriplePattern{kSubject, Term::iri(kRdfType), std::get<Term>(shape.target->target)});
    return q;
  }

  // Explicit target query: rename its projected variable to ?x and the rest to
  // ?t0, ?t1, ... so they never clash with constraint variables.
  const SelectQuery& tq = std::get<SelectQuery>(shape.target->target);
  std::map<std::string, Variable> rename;
  rename[tq.projected.front().name] = kSubject;
  auto map_var = [&](const Variable& v) {
    auto it = rename.find(v.name);
    if (it == rename.end()) {
      it = rename.emplace(v.name, Variable{"t" + std::to_string(rename.size() - 1)}).first;
    }
    return it->second;
  };
  if (tq.subject() != tq.projected.front()) {
    throw QueryError("target query of '" + shape.name +
                     "' must use its projected variable as pattern subject");
  }
  for (const auto& p : tq.patterns) {
    TriplePattern np{map_var(p.subject), p.predicate, p.object};
    if (const auto* v = std::get_if<Variable>(&p.object)) np.object = map_var(*v);
    q.patterns.push_back(std::move(np));
  }
  for (const auto& [a, b] : tq.inequalities) q.inequalities.emplace_back(map_var(a), map_var(b));
  for (const auto& t : tq.value_tests) q.value_tests.push_back({map_var(t.var), t.kind, t.value});
  for (const auto& f : tq.filters) {
    InstanceFilter nf = f;
    nf.var = map_var(f.var);
    nf.essential = true;
    nf.source_shape = shape.name;
    q.filters.push_back(std::move(nf));
  }
  return q;
}

// Adds `n` pairwise-distinct values of `c.path` bound to fresh variables.
void add_distinct_values(SelectQuery& q, const Constraint& c, std::size_t n,
                         std::size_t& next_var) {
  std::vector<Variable> vars;
  for (std::size_t k = 0; k < n; ++k) {
    Variable v{"p" + std::to_string(next_var++)};
    q.patterns.push_back(TriplePattern{kSubject, c.path, v});
    if (c.value_filter) {
      q.value_tests.push_back(
          {v,
           c.value_filter->kind == ValueFilter::Kind::kConstant ? ValueTest::Kind::kEquals
                                                                : ValueTest::Kind::kDatatype,
           c.value_filter->value});
    }
    for (const auto& prev : vars) q.inequalities.emplace_back(prev, v);
    vars.push_back(std::move(v));
  }
}

}  // namespace

ShapeQuery gen_target_query(const Shape& shape) {
  ShapeQuery sq;
  sq.role = ShapeQuery::Role::kTarget;
  sq.query = scoped_base(shape, QueryScope::targets());
  return sq;
}

ShapeQuery gen_min_query(const Shape& shape, const QueryScope& scope) {
  if (shape.min_count() == 0) {
    throw QueryError("shape '" + shape.name + "' has no min constraints");
  }
  ShapeQuery sq;
  sq.role = ShapeQuery::Role::kMin;
  sq.query = scoped_base(shape, scope);
  std::size_t next_var = 0;
  for (std::size_t i = 0; i < shape.constraints.size(); ++i) {
    const Constraint& c = shape.constraints[i];
    if (c.kind != ConstraintKind::kMin) continue;
    if (c.is_inter_shape()) {
      // Neighbour verdicts decide the count; the query only requires one
      // neighbour and exposes all of them for grounding.
      Variable v{"p" + std::to_string(next_var++)};
      sq.query.patterns.push_back(TriplePattern{kSubject, c.path, v});
      sq.query.projected.push_back(v);
      sq.neighbor_vars.emplace_back(i, v);
    } else {
      add_distinct_values(sq.query, c, c.count, next_var);
    }
  }
  return sq;
}

std::vector<ShapeQuery> gen_max_queries(const Shape& shape, const QueryScope& scope) {
  std::vector<ShapeQuery> out;
  for (std::size_t i = 0; i < shape.constraints.size(); ++i) {
    const Constraint& c = shape.constraints[i];
    if (c.kind != ConstraintKind::kMax) continue;
    ShapeQuery sq;
    sq.role = ShapeQuery::Role::kMax;
    sq.constraint = i;
    sq.query = scoped_base(shape, scope);
    std::size_t next_var = 0;
    if (c.is_inter_shape()) {
      Variable v{"p0"};
      sq.query.patterns.push_back(TriplePattern{kSubject, c.path, v});
      sq.query.projected.push_back(v);
      sq.neighbor_vars.emplace_back(i, v);
    } else {
      add_distinct_values(sq.query, c, c.count + 1, next_var);
    }
    out.push_back(std::move(sq));
  }
  return out;
}

SelectQuery push_instance_filter(SelectQuery query, std::span<const Term> valid,
                                 std::span<const Term> invalid, const Variable& var,
                                 const std::string& source_shape, bool allow_include) {
  if (query.filter_on(var) != nullptr) return query;
  if (valid.empty() && invalid.empty()) return query;
  // Smallest list wins; an empty pick falls back to the other list.
  bool include = valid.size() <= invalid.size();
  if (include && valid.empty()) include = false;
  if (!include && invalid.empty()) include = true;
  if (include && !allow_include) {
    if (invalid.empty()) return query;
    include = false;
  }
  InstanceFilter f;
  f.var = var;
  f.source_shape = source_shape;
  if (include) {
    f.mode = FilterMode::kInclude;
    f.entities.assign(valid.begin(), valid.end());
  } else {
    f.mode = FilterMode::kExclude;
    f.entities.assign(invalid.begin(), invalid.end());
  }
  query.filters.push_back(std::move(f));
  return query;
}

SelectivityRank selectivity_rank(const SelectQuery& query) {
  SelectivityRank r;
  r.unfiltered = std::any_of(query.filters.begin(), query.filters.end(),
                             [](const InstanceFilter& f) { return !f.essential; })
                     ? 0
                     : 1;
  r.negated_patterns = -static_cast<long>(query.patterns.size());
  return r;
}

namespace {

// Splits the filter at `filter_index` into chunks so every part fits.
std::vector<SelectQuery> pack(const SelectQuery& q, std::size_t filter_index,
                              std::size_t max_len) {
  SelectQuery empty = q;
  empty.filters[filter_index].entities.clear();
  const std::size_t base = serialize(empty).size();
  const auto& entities = q.filters[filter_index].entities;
  std::vector<SelectQuery> parts;
  std::size_t i = 0;
  while (i < entities.size()) {
    SelectQuery part = empty;
    auto& chunk = part.filters[filter_index].entities;
    std::size_t len = base;
    while (i < entities.size() &&
           (chunk.empty() || len + entities[i].str().size() + 1 <= max_len)) {
      len += entities[i].str().size() + 1;
      chunk.push_back(entities[i++]);
    }
    parts.push_back(std::move(part));
  }
  return parts;
}

}  // namespace

QueryPlan partition_plan(const SelectQuery& query, std::size_t max_query_len,
                         std::size_t max_parts, std::size_t page_size) {
  if (page_size == 0 || max_parts == 0) {
    throw QueryError("page_size and max_parts must be positive");
  }
  QueryPlan plan;
  plan.page_size = page_size;
  plan.estimated_selectivity = selectivity_rank(query);
  SelectQuery q = query;
  while (true) {
    if (serialize(q).size() <= max_query_len) {
      plan.parts.push_back(std::move(q));
      return plan;
    }
    std::optional<std::size_t> largest;
    for (std::size_t i = 0; i < q.filters.size(); ++i) {
      if (q.filters[i].essential) continue;
      if (!largest || q.filters[i].entities.size() > q.filters[*largest].entities.size()) {
        largest = i;
      }
    }
    if (largest) {
      if (q.filters[*largest].mode == FilterMode::kInclude) {
        auto parts = pack(q, *largest, max_query_len);
        const bool fit = std::all_of(parts.begin(), parts.end(), [&](const SelectQuery& p) {
          return serialize(p).size() <= max_query_len;
        });
        if (parts.size() <= max_parts && fit) {
          plan.parts = std::move(parts);
          return plan;
        }
      }
      // Dropping an optional filter only widens the answer; still sound.
      q.filters.erase(q.filters.begin() + static_cast<std::ptrdiff_t>(*largest));
      plan.dropped_filters = true;
      continue;
    }
    std::optional<std::size_t> essential;
    for (std::size_t i = 0; i < q.filters.size(); ++i) {
      if (q.filters[i].mode != FilterMode::kInclude) continue;
      if (!essential || q.filters[i].entities.size() > q.filters[*essential].entities.size()) {
        essential = i;
      }
    }
    if (!essential) {
      plan.parts.push_back(std::move(q));
      return plan;
    }
    plan.parts = pack(q, *essential, max_query_len);
    return plan;
  }
}

QueryPlan partition_plan(const ShapeQuery& query, std::size_t max_query_len,
                         std::size_t max_parts, std::size_t page_size) {
  QueryPlan plan = partition_plan(query.query, max_query_len, max_parts, page_size);
  plan.role = query.role;
  plan.constraint = query.constraint;
  plan.neighbor_vars = query.neighbor_vars;
  return plan;
}

std::vector<QueryPlan> order_query_plans(std::vector<QueryPlan> plans) {
  std::stable_sort(plans.begin(), plans.end(), [](const QueryPlan& a, const QueryPlan& b) {
    return a.estimated_selectivity < b.estimated_selectivity;
  });
  return plans;
}

}  // namespace travshacl
