#include "travshacl/term.hpp"

namespace travshacl {

std::string escape_literal(std::string_view lexical) {
  std::string out;
  out.reserve(lexical.size() + 2);
  for (char c : lexical) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

namespace {

// Index of the closing quote of a literal spelling.
std::size_t closing_quote(const std::string& text) {
  for (std::size_t i = 1; i < text.size(); ++i) {
    if (text[i] == '\\') {
      ++i;
    } else if (text[i] == '"') {
      return i;
    }
  }
  return text.size();
}

}  // namespace

Term Term::iri(std::string_view iri) {
  std::string s;
  s.reserve(iri.size() + 2);
  s += '<';
  s += iri;
  s += '>';
  return from_canonical(std::move(s));
}

Term Term::literal(std::string_view lexical) {
  return from_canonical("\"" + escape_literal(lexical) + "\"");
}

Term Term::typed_literal(std::string_view lexical, std::string_view datatype) {
  if (datatype == kXsdString) return literal(lexical);
  return from_canonical("\"" + escape_literal(lexical) + "\"^^<" +
                        std::string(datatype) + ">");
}

Term Term::lang_literal(std::string_view lexical, std::string_view lang) {
  return from_canonical("\"" + escape_literal(lexical) + "\"@" +
                        std::string(lang));
}

std::string Term::iri_value() const {
  if (!is_iri()) return {};
  return text_.substr(1, text_.size() - 2);
}

std::string Term::lexical() const {
  if (!is_literal()) return {};
  const std::size_t end = closing_quote(text_);
  std::string out;
  for (std::size_t i = 1; i < end; ++i) {
    if (text_[i] == '\\' && i + 1 < end) {
      const char n = text_[++i];
      switch (n) {
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case 't': out += '\t'; break;
        default: out += n;
      }
    } else {
      out += text_[i];
    }
  }
  return out;
}

std::string Term::datatype() const {
  if (!is_literal()) return {};
  const std::size_t end = closing_quote(text_);
  const std::string_view rest = std::string_view(text_).substr(end + 1);
  if (rest.starts_with("^^<")) {
    return std::string(rest.substr(3, rest.size() - 4));
  }
  if (rest.starts_with("@")) return std::string(kRdfLangString);
  return std::string(kXsdString);
}

std::string Term::lang() const {
  if (!is_literal()) return {};
  const std::size_t end = closing_quote(text_);
  const std::string_view rest = std::string_view(text_).substr(end + 1);
  if (rest.starts_with("@")) return std::string(rest.substr(1));
  return {};
}

}  // namespace travshacl
