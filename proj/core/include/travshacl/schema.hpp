#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "travshacl/query.hpp"
#include "travshacl/term.hpp"

namespace travshacl {

enum class ConstraintKind { kMin, kMax };

/// Reference from a constraint to another shape. A negated reference counts
/// the neighbours that do *not* conform to `shape`.
struct ShapeRef {
  std::string shape;
  bool negated = false;
  friend bool operator==(const ShapeRef&, const ShapeRef&) = default;
};

/// `value` constraints compare against a constant, `datatype` ones require a
/// literal of that datatype.
struct ValueFilter {
  enum class Kind { kConstant, kDatatype };
  Kind kind = Kind::kConstant;
  Term value;  // constant term, or the datatype IRI as an IRI term
  friend bool operator==(const ValueFilter&, const ValueFilter&) = default;
};

/// Cardinality restriction on the distinct values reachable over one
/// predicate: `min n path` or `max n path`, optionally qualified.
struct Constraint {
  ConstraintKind kind = ConstraintKind::kMin;
  std::size_t count = 1;
  Term path;
  std::optional<ValueFilter> value_filter;
  std::optional<ShapeRef> shape_ref;

  bool is_inter_shape() const noexcept { return shape_ref.has_value(); }

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct TargetDefinition {
  std::variant<Term, SelectQuery> target;  // class IRI or explicit query
  // Original text of an explicit query, kept for serialization.
  std::string query_text;

  bool is_class() const noexcept { return std::holds_alternative<Term>(target); }
  friend bool operator==(const TargetDefinition&, const TargetDefinition&) = default;
};

struct Shape {
  std::string name;
  std::optional<TargetDefinition> target;
  std::vector<Constraint> constraints;

  std::size_t min_count() const;
  std::size_t max_count() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Named shapes in declaration order. Immutable once built.
class ShapeSchema {
 public:
  ShapeSchema() = default;
  // Validates name uniqueness and reference resolution. Throws SchemaError.
  explicit ShapeSchema(std::vector<Shape> shapes);

  const std::vector<Shape>& shapes() const noexcept { return shapes_; }
  std::size_t size() const noexcept { return shapes_.size(); }
  bool empty() const noexcept { return shapes_.empty(); }
  std::size_t constraint_count() const;

  const Shape* find(std::string_view name) const;
  const Shape& at(std::string_view name) const;
  // Declaration index of a shape; throws for unknown names.
  std::size_t index_of(std::string_view name) const;

  friend bool operator==(const ShapeSchema& a, const ShapeSchema& b) {
    return a.shapes_ == b.shapes_;
  }

 private:
  std::vector<Shape> shapes_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
};

/// Reads the JSON schema document. Throws SyntaxError or SchemaError.
ShapeSchema parse_schema(std::string_view document);
ShapeSchema load_schema_file(const std::string& path);

/// Canonical JSON text for a schema; `parse_schema` reads it back to an equal
/// schema.
std::string serialize_schema(const ShapeSchema& schema);

}  // namespace travshacl
