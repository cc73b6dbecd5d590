#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "travshacl/query.hpp"
#include "travshacl/schema.hpp"

namespace travshacl {

inline constexpr std::size_t kDefaultPageSize = 10'000;
inline constexpr std::size_t kDefaultMaxQueryLength = 65'000;
inline constexpr std::size_t kDefaultMaxParts = 10;

/// Which entities of a shape a generated query ranges over: the shape's
/// targets, or an explicit entity list (entities reached only through
/// references).
struct QueryScope {
  std::optional<std::vector<Term>> entities;

  static QueryScope targets() { return {}; }
  static QueryScope of(std::vector<Term> e) { return {std::move(e)}; }
};

/// A generated query plus the bookkeeping needed to ground its answers.
struct ShapeQuery {
  enum class Role { kTarget, kMin, kMax };
  Role role = Role::kTarget;
  SelectQuery query;
  // For kMax: index of the constraint in the shape.
  std::size_t constraint = 0;
  // Projected neighbour variable per inter-shape constraint.
  std::vector<std::pair<std::size_t, Variable>> neighbor_vars;
};

ShapeQuery gen_target_query(const Shape& shape);
// All min constraints of a shape in one conjunctive query. Throws QueryError
// when the shape has none.
ShapeQuery gen_min_query(const Shape& shape, const QueryScope& scope = QueryScope::targets());
// One violator query per max constraint.
std::vector<ShapeQuery> gen_max_queries(const Shape& shape,
                                        const QueryScope& scope = QueryScope::targets());

/// Pushes the shorter of two verdict lists into `query` as a filter on `var`.
/// `valid` holds the neighbours that count towards the constraint, `invalid`
/// those that do not. With `allow_include` false only the exclusion form is
/// used, which stays sound when some neighbours have no verdict yet.
SelectQuery push_instance_filter(SelectQuery query, std::span<const Term> valid,
                                 std::span<const Term> invalid, const Variable& var,
                                 const std::string& source_shape = {},
                                 bool allow_include = true);

/// Lexicographic key; smaller runs first.
struct SelectivityRank {
  int unfiltered = 1;         // 0 when an optional instance filter is present
  long negated_patterns = 0;  // minus the number of triple patterns
  friend auto operator<=>(const SelectivityRank&, const SelectivityRank&) = default;
};

SelectivityRank selectivity_rank(const SelectQuery& query);

struct QueryPlan {
  std::vector<SelectQuery> parts;
  std::size_t page_size = kDefaultPageSize;
  SelectivityRank estimated_selectivity;
  ShapeQuery::Role role = ShapeQuery::Role::kTarget;
  std::size_t constraint = 0;
  std::vector<std::pair<std::size_t, Variable>> neighbor_vars;
  bool dropped_filters = false;
};

/// Splits a query whose text exceeds `max_query_len` by chunking an include
/// filter. If more than `max_parts` chunks would be needed the optional
/// filters are dropped instead. Essential filters are always kept and chunked.
QueryPlan partition_plan(const SelectQuery& query, std::size_t max_query_len,
                         std::size_t max_parts, std::size_t page_size);
QueryPlan partition_plan(const ShapeQuery& query, std::size_t max_query_len,
                         std::size_t max_parts, std::size_t page_size);

/// Stable sort by ascending selectivity rank.
std::vector<QueryPlan> order_query_plans(std::vector<QueryPlan> plans);

}  // namespace travshacl
