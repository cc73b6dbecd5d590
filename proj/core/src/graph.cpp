#include "travshacl/graph.hpp"

#include <fstream>
#include <sstream>

#include "travshacl/errors.hpp"

namespace travshacl {

Graph::Id Graph::intern(const Term& t) {
  const auto it = ids_.find(t);
  if (it != ids_.end()) return it->second;
  const Id id = static_cast<Id>(terms_.size());
  terms_.push_back(t);
  ids_.emplace(t, id);
  role_.push_back(0);
  return id;
}

bool Graph::add(const Term& subject, const Term& predicate, const Term& object) {
  const Id s = intern(subject), p = intern(predicate), o = intern(object);
  if (!triples_.insert(Triple{s, p, o}).second) return false;
  triple_list_.push_back(Triple{s, p, o});
  auto& objs = ps_index_[key(p, s)];
  if (objs.empty()) predicate_subjects_[p].push_back(s);
  objs.push_back(o);
  po_index_[key(p, o)].push_back(s);
  auto mark = [&](Id id, std::uint8_t bit) {
    if (role_[id] == 0) ++node_count_;
    if (bit == 1 && !(role_[id] & 1)) ++subject_count_;
    role_[id] |= bit;
  };
  mark(s, 1);
  mark(o, 2);
  return true;
}

std::optional<Graph::Id> Graph::id_of(const Term& t) const {
  const auto it = ids_.find(t);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::span<const Graph::Id> Graph::objects(Id predicate, Id subject) const {
  const auto it = ps_index_.find(key(predicate, subject));
  if (it == ps_index_.end()) return {};
  return it->second;
}

std::span<const Graph::Id> Graph::subjects(Id predicate, Id object) const {
  const auto it = po_index_.find(key(predicate, object));
  if (it == po_index_.end()) return {};
  return it->second;
}

std::span<const Graph::Id> Graph::subjects_with(Id predicate) const {
  const auto it = predicate_subjects_.find(predicate);
  if (it == predicate_subjects_.end()) return {};
  return it->second;
}

std::size_t ResultSet::column(const Variable& v) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i] == v) return i;
  }
  throw QueryError("variable ?" + v.name + " not in result");
}

// ---------------------------------------------------------------------------
// N-Triples

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t number) : s_(line), line_(number) {}

  // Returns false for blank and comment-only lines.
  bool parse(Term& s, Term& p, Term& o) {
    skip_ws();
    if (at_end() || peek() == '#') return false;
    s = subject_or_object(false);
    skip_ws();
    p = iri();
    skip_ws();
    o = subject_or_object(true);
    skip_ws();
    if (at_end() || peek() != '.') fail("expected '.' at end of triple");
    ++i_;
    skip_ws();
    if (!at_end() && peek() != '#') fail("unexpected content after '.'");
    return true;
  }

 private:
  bool at_end() const { return i_ >= s_.size(); }
  char peek() const { return s_[i_]; }
  void skip_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++i_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError("N-Triples line " + std::to_string(line_) + ": " + msg, line_);
  }

  std::uint32_t hex(std::size_t digits) {
    if (i_ + digits > s_.size()) fail("truncated unicode escape");
    std::uint32_t v = 0;
    for (std::size_t k = 0; k < digits; ++k) {
      const char c = s_[i_++];
      v <<= 4;
      if (c >= '0' && c <= '9') v |= static_cast<std::uint32_t>(c - '0');
      else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint32_t>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint32_t>(c - 'A' + 10);
      else fail("bad hex digit in escape");
    }
    return v;
  }

  std::string iri_body() {
    if (at_end() || peek() != '<') fail("expected IRI");
    ++i_;
    std::string out;
    while (!at_end() && peek() != '>') {
      const char c = s_[i_++];
      if (c == '\\') {
        if (at_end()) fail("bad escape in IRI");
        const char k = s_[i_++];
        if (k == 'u') append_utf8(out, hex(4));
        else if (k == 'U') append_utf8(out, hex(8));
        else fail("bad escape in IRI");
      } else if (c == ' ' || c == '<' || c == '"') {
        fail("illegal character in IRI");
      } else {
        out += c;
      }
    }
    if (at_end()) fail("unterminated IRI");
    ++i_;
    return out;
  }

  Term iri() { return Term::iri(iri_body()); }

  Term subject_or_object(bool allow_literal) {
    if (at_end()) fail("unexpected end of line");
    if (peek() == '<') return iri();
    if (peek() == '_') {
      if (i_ + 1 >= s_.size() || s_[i_ + 1] != ':') fail("bad blank node");
      i_ += 2;
      const std::size_t b = i_;
      while (!at_end() && peek() != ' ' && peek() != '\t' && peek() != '.') ++i_;
      if (b == i_) fail("empty blank node label");
      return Term::iri("urn:bnode:" + std::string(s_.substr(b, i_ - b)));
    }
    if (peek() == '"' && allow_literal) return literal();
    fail("expected term");
  }

  Term literal() {
    ++i_;
    std::string lex;
    bool closed = false;
    while (!at_end()) {
      const char c = s_[i_++];
      if (c == '"') {
        closed = true;
        break;
      }
      if (c != '\\') {
        lex += c;
        continue;
      }
      if (at_end()) fail("bad escape");
      const char k = s_[i_++];
      switch (k) {
        case 't': lex += '\t'; break;
        case 'b': lex += '\b'; break;
        case 'n': lex += '\n'; break;
        case 'r': lex += '\r'; break;
        case 'f': lex += '\f'; break;
        case '"': lex += '"'; break;
        case '\'': lex += '\''; break;
        case '\\': lex += '\\'; break;
        case 'u': append_utf8(lex, hex(4)); break;
        case 'U': append_utf8(lex, hex(8)); break;
        default: fail("bad escape");
      }
    }
    if (!closed) fail("unterminated literal");
    if (!at_end() && peek() == '@') {
      const std::size_t b = ++i_;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')) ++i_;
      if (b == i_) fail("empty language tag");
      return Term::lang_literal(lex, s_.substr(b, i_ - b));
    }
    if (i_ + 1 < s_.size() && peek() == '^' && s_[i_ + 1] == '^') {
      i_ += 2;
      return Term::typed_literal(lex, iri_body());
    }
    return Term::literal(lex);
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t i_ = 0;
};

}  // namespace

Graph load_ntriples(std::istream& in) {
  Graph g;
  std::string line;
  std::size_t number = 0;
  Term s, p, o;
  while (std::getline(in, line)) {
    ++number;
    if (LineParser(line, number).parse(s, p, o)) g.add(s, p, o);
  }
  return g;
}

Graph load_ntriples_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open data file '" + path + "'");
  return load_ntriples(in);
}

Graph load_ntriples_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_ntriples(in);
}

}  // namespace travshacl
