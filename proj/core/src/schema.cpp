#include "travshacl/schema.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "travshacl/errors.hpp"

namespace travshacl {

using nlohmann::json;

std::size_t Shape::min_count() const {
  std::size_t n = 0;
  for (const auto& c : constraints) n += c.kind == ConstraintKind::kMin;
  return n;
}

std::size_t Shape::max_count() const {
  return constraints.size() - min_count();
}

ShapeSchema::ShapeSchema(std::vector<Shape> shapes) : shapes_(std::move(shapes)) {
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    const auto& name = shapes_[i].name;
    if (name.empty()) throw SchemaError("shape with empty name");
    if (!by_name_.emplace(name, i).second) {
      throw SchemaError("duplicate shape name '" + name + "'");
    }
  }
  for (const auto& s : shapes_) {
    if (s.constraints.empty()) {
      throw SchemaError("shape '" + s.name + "' has no constraints");
    }
    for (const auto& c : s.constraints) {
      if (c.kind == ConstraintKind::kMin && c.count == 0) {
        throw SchemaError("min constraint with count 0 in shape '" + s.name + "'");
      }
      if (c.value_filter && c.shape_ref) {
        throw SchemaError("constraint in shape '" + s.name +
                          "' has both a value filter and a shape reference");
      }
      if (c.shape_ref && !by_name_.contains(c.shape_ref->shape)) {
        throw DanglingReferenceError(c.shape_ref->shape);
      }
    }
  }
}

std::size_t ShapeSchema::constraint_count() const {
  std::size_t n = 0;
  for (const auto& s : shapes_) n += s.constraints.size();
  return n;
}

const Shape* ShapeSchema::find(std::string_view name) const {
  const auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : &shapes_[it->second];
}

const Shape& ShapeSchema::at(std::string_view name) const {
  return shapes_[index_of(name)];
}

std::size_t ShapeSchema::index_of(std::string_view name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) {
    throw SchemaError("unknown shape '" + std::string(name) + "'");
  }
  return it->second;
}

namespace {

// Values in the document are either `<iri>`, a plain IRI, or an N-Triples
// literal spelling starting with a quote.
Term document_term(const std::string& s) {
  if (s.empty()) throw SchemaError("empty term");
  if (s.front() == '"') {
    // Reuse the query lexer for literal spellings.
    const SelectQuery q = parse_select("SELECT ?x WHERE { ?x <p> " + s + " }");
    return std::get<Term>(q.patterns.front().object);
  }
  if (s.front() == '<' && s.back() == '>') return Term::iri(s.substr(1, s.size() - 2));
  return Term::iri(s);
}

std::string require_string(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw SchemaError(where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

Constraint parse_constraint(const json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": constraint must be an object");
  Constraint c;
  const std::string kind = require_string(j, "kind", where);
  if (kind == "min") {
    c.kind = ConstraintKind::kMin;
  } else if (kind == "max") {
    c.kind = ConstraintKind::kMax;
  } else {
    throw SchemaError(where + ": unknown constraint kind '" + kind + "'");
  }
  const auto count = j.find("count");
  if (count == j.end() || !count->is_number_integer() || count->get<long long>() < 0) {
    throw SchemaError(where + ": 'count' must be a non-negative integer");
  }
  c.count = count->get<std::size_t>();
  c.path = document_term(require_string(j, "path", where));
  if (!c.path.is_iri()) throw SchemaError(where + ": path must be an IRI");
  if (j.contains("shape")) {
    c.shape_ref = ShapeRef{require_string(j, "shape", where), false};
    if (j.contains("negated")) {
      if (!j["negated"].is_boolean()) throw SchemaError(where + ": 'negated' must be boolean");
      c.shape_ref->negated = j["negated"].get<bool>();
    }
  } else if (j.contains("negated")) {
    throw SchemaError(where + ": 'negated' without 'shape'");
  }
  if (j.contains("value") && j.contains("datatype")) {
    throw SchemaError(where + ": 'value' and 'datatype' are exclusive");
  }
  if (j.contains("value")) {
    c.value_filter = ValueFilter{ValueFilter::Kind::kConstant,
                                 document_term(require_string(j, "value", where))};
  } else if (j.contains("datatype")) {
    c.value_filter = ValueFilter{ValueFilter::Kind::kDatatype,
                                 document_term(require_string(j, "datatype", where))};
  }
  return c;
}

}  // namespace

ShapeSchema parse_schema(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SyntaxError(std::string("schema document: ") + e.what(), e.byte);
  }
  if (!doc.is_object() || !doc.contains("shapes") || !doc["shapes"].is_array()) {
    throw SchemaError("schema document must be an object with a 'shapes' array");
  }
  std::vector<Shape> shapes;
  for (const auto& js : doc["shapes"]) {
    if (!js.is_object()) throw SchemaError("shape entries must be objects");
    Shape s;
    s.name = require_string(js, "name", "shape");
    const std::string where = "shape '" + s.name + "'";
    if (js.contains("targetClass") && js.contains("targetQuery")) {
      throw SchemaError(where + ": at most one target definition");
    }
    if (js.contains("targetClass")) {
      s.target = TargetDefinition{document_term(require_string(js, "targetClass", where)), {}};
    } else if (js.contains("targetQuery")) {
      TargetDefinition t;
      t.query_text = require_string(js, "targetQuery", where);
      SelectQuery q = parse_select(t.query_text);
      if (q.projected.size() != 1) {
        throw SchemaError(where + ": target query must project exactly one variable");
      }
      t.target = std::move(q);
      s.target = std::move(t);
    }
    const auto cs = js.find("constraints");
    if (cs == js.end() || !cs->is_array()) {
      throw SchemaError(where + ": missing 'constraints' array");
    }
    for (const auto& jc : *cs) s.constraints.push_back(parse_constraint(jc, where));
    shapes.push_back(std::move(s));
  }
  return ShapeSchema(std::move(shapes));
}

ShapeSchema load_schema_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open schema file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_schema(ss.str());
}

std::string serialize_schema(const ShapeSchema& schema) {
  json shapes = json::array();
  for (const auto& s : schema.shapes()) {
    json js;
    js["name"] = s.name;
    if (s.target) {
      if (s.target->is_class()) {
        js["targetClass"] = std::get<Term>(s.target->target).iri_value();
      } else {
        js["targetQuery"] = s.target->query_text;
      }
    }
    json cs = json::array();
    for (const auto& c : s.constraints) {
      json jc;
      jc["kind"] = c.kind == ConstraintKind::kMin ? "min" : "max";
      jc["count"] = c.count;
      jc["path"] = c.path.iri_value();
      if (c.shape_ref) {
        jc["shape"] = c.shape_ref->shape;
        if (c.shape_ref->negated) jc["negated"] = true;
      }
      if (c.value_filter) {
        const Term& v = c.value_filter->value;
        const std::string text = v.is_iri() ? v.iri_value() : v.str();
        jc[c.value_filter->kind == ValueFilter::Kind::kConstant ? "value" : "datatype"] = text;
      }
      cs.push_back(std::move(jc));
    }
    js["constraints"] = std::move(cs);
    shapes.push_back(std::move(js));
  }
  json doc;
  doc["shapes"] = std::move(shapes);
  return doc.dump(2) + "\n";
}

}  // namespace travshacl
