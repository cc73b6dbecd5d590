#pragma once

#include <compare>
#include <functional>
#include <string>
#include <string_view>

namespace travshacl {

inline constexpr std::string_view kRdfType =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kXsdString =
    "http://www.w3.org/2001/XMLSchema#string";
inline constexpr std::string_view kXsdInteger =
    "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr std::string_view kRdfLangString =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";

/// An RDF term held in its canonical N-Triples spelling, e.g. `<http://a>`,
/// `"x"`, `"x"@en` or `"1"^^<http://...#integer>`.
///
/// Ordering is byte-wise on that spelling, which for UTF-8 equals code-point
/// order. Every backend sorts with it so paged answers line up.
class Term {
 public:
  Term() = default;

  static Term iri(std::string_view iri);
  static Term literal(std::string_view lexical);
  static Term typed_literal(std::string_view lexical, std::string_view datatype);
  static Term lang_literal(std::string_view lexical, std::string_view lang);

  // Wraps text that is already in canonical form. Not validated.
  static Term from_canonical(std::string text) {
    Term t;
    t.text_ = std::move(text);
    return t;
  }

  bool is_iri() const noexcept { return !text_.empty() && text_.front() == '<'; }
  bool is_literal() const noexcept {
    return !text_.empty() && text_.front() == '"';
  }
  bool empty() const noexcept { return text_.empty(); }

  // IRI without brackets. Only meaningful for IRIs.
  std::string iri_value() const;
  // Unescaped lexical form. Only meaningful for literals.
  std::string lexical() const;
  // Datatype IRI of a literal (xsd:string / rdf:langString for the implicit
  // cases); empty for IRIs.
  std::string datatype() const;
  std::string lang() const;

  const std::string& str() const noexcept { return text_; }

  friend bool operator==(const Term&, const Term&) = default;
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    return a.text_.compare(b.text_) <=> 0;
  }

 private:
  std::string text_;
};

std::string escape_literal(std::string_view lexical);

}  // namespace travshacl

template <>
struct std::hash<travshacl::Term> {
  std::size_t operator()(const travshacl::Term& t) const noexcept {
    return std::hash<std::string>{}(t.str());
  }
};
