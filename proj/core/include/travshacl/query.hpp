#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "travshacl/term.hpp"

namespace travshacl {

/// A query variable, stored without the leading `?`.
struct Variable {
  std::string name;
  friend bool operator==(const Variable&, const Variable&) = default;
  friend auto operator<=>(const Variable&, const Variable&) = default;
};

/// `?subject <predicate> object .` where the subject is always a variable.
struct TriplePattern {
  Variable subject;
  Term predicate;
  std::variant<Variable, Term> object;
  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

/// Restriction on the value bound to a variable: either equality with a
/// constant or a literal of a given datatype.
struct ValueTest {
  enum class Kind { kEquals, kDatatype };
  Variable var;
  Kind kind = Kind::kEquals;
  Term value;  // the constant, or the datatype IRI as an IRI term
  friend bool operator==(const ValueTest&, const ValueTest&) = default;
};

enum class FilterMode { kInclude, kExclude };

/// A list of entities pushed into a query, rendered as `VALUES` (include) or
/// `FILTER NOT IN` (exclude).
struct InstanceFilter {
  Variable var;
  FilterMode mode = FilterMode::kInclude;
  std::vector<Term> entities;
  std::string source_shape;
  // Essential filters restrict the query scope and may be chunked but never
  // dropped. Pushed neighbour filters are optional.
  bool essential = false;
  friend bool operator==(const InstanceFilter&, const InstanceFilter&) = default;
};

/// Star-shaped SELECT DISTINCT query. Results are always ordered by the
/// projected variables, in projection order.
struct SelectQuery {
  std::vector<Variable> projected;
  std::vector<TriplePattern> patterns;
  std::vector<std::pair<Variable, Variable>> inequalities;
  std::vector<ValueTest> value_tests;
  std::vector<InstanceFilter> filters;  // at most one per variable
  std::optional<std::size_t> limit;
  std::optional<std::size_t> offset;

  // The variable every pattern hangs off.
  const Variable& subject() const { return projected_subject_; }
  void set_subject(Variable v) { projected_subject_ = std::move(v); }

  const InstanceFilter* filter_on(const Variable& var) const;
  // Number of entities across all filters.
  std::size_t filtered_entity_count() const;

  friend bool operator==(const SelectQuery&, const SelectQuery&) = default;

 private:
  Variable projected_subject_{"x"};
};

/// Canonical SPARQL text. Identical queries produce identical bytes.
std::string serialize(const SelectQuery& query);

/// Parses the SELECT fragment produced by `serialize`, plus `PREFIX`
/// declarations, prefixed names, the `a` keyword and `$var` spelling, which
/// hand-written target queries tend to use. Throws SyntaxError.
SelectQuery parse_select(std::string_view text);

}  // namespace travshacl
