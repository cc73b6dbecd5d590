#include "travshacl/query.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "travshacl/errors.hpp"

namespace travshacl {

const InstanceFilter* SelectQuery::filter_on(const Variable& var) const {
  for (const auto& f : filters) {
    if (f.var == var) return &f;
  }
  return nullptr;
}

std::size_t SelectQuery::filtered_entity_count() const {
  std::size_t n = 0;
  for (const auto& f : filters) n += f.entities.size();
  return n;
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize(const SelectQuery& q) {
  std::string out = "SELECT DISTINCT";
  for (const auto& v : q.projected) out += " ?" + v.name;
  out += " WHERE {\n";
  for (const auto& p : q.patterns) {
    out += "  ?" + p.subject.name + " " + p.predicate.str() + " ";
    if (const auto* v = std::get_if<Variable>(&p.object)) {
      out += "?" + v->name;
    } else {
      out += std::get<Term>(p.object).str();
    }
    out += " .\n";
  }
  for (const auto& [a, b] : q.inequalities) {
    out += "  FILTER(?" + a.name + " != ?" + b.name + ")\n";
  }
  for (const auto& t : q.value_tests) {
    if (t.kind == ValueTest::Kind::kEquals) {
      out += "  FILTER(?" + t.var.name + " = " + t.value.str() + ")\n";
    } else {
      out += "  FILTER(datatype(?" + t.var.name + ") = " + t.value.str() + ")\n";
    }
  }
  for (const auto& f : q.filters) {
    if (f.mode == FilterMode::kInclude) {
      out += "  VALUES ?" + f.var.name + " {";
      for (const auto& e : f.entities) out += " " + e.str();
      out += " }\n";
    } else {
      out += "  FILTER(?" + f.var.name + " NOT IN (";
      for (std::size_t i = 0; i < f.entities.size(); ++i) {
        if (i) out += ", ";
        out += f.entities[i].str();
      }
      out += "))\n";
    }
  }
  out += "}\nORDER BY";
  for (const auto& v : q.projected) out += " ?" + v.name;
  if (q.limit) out += "\nLIMIT " + std::to_string(*q.limit);
  if (q.offset) out += "\nOFFSET " + std::to_string(*q.offset);
  out += "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok {
  kIri, kPname, kVar, kLiteral, kInteger, kWord, kPunct, kEnd
};

struct Token {
  Tok kind;
  std::string text;  // IRI value, var name, canonical literal, word, punct
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  Token next() {
    skip_space();
    const std::size_t start = i_;
    if (i_ >= s_.size()) return {Tok::kEnd, "", start};
    const char c = s_[i_];
    if (c == '<') {
      // `<` is also never used as an operator in the supported fragment.
      const auto end = s_.find('>', i_);
      if (end == std::string_view::npos) fail("unterminated IRI", start);
      std::string iri(s_.substr(i_ + 1, end - i_ - 1));
      i_ = end + 1;
      return {Tok::kIri, iri, start};
    }
    if (c == '?' || c == '$') {
      ++i_;
      const std::size_t b = i_;
      while (i_ < s_.size() && (std::isalnum(uc(s_[i_])) || s_[i_] == '_')) ++i_;
      if (b == i_) fail("empty variable name", start);
      return {Tok::kVar, std::string(s_.substr(b, i_ - b)), start};
    }
    if (c == '"') return literal(start);
    if (std::isdigit(uc(c)) || ((c == '-' || c == '+') && i_ + 1 < s_.size() &&
                                std::isdigit(uc(s_[i_ + 1])))) {
      const std::size_t b = i_++;
      while (i_ < s_.size() && std::isdigit(uc(s_[i_]))) ++i_;
      return {Tok::kInteger, std::string(s_.substr(b, i_ - b)), start};
    }
    if (c == '!' && i_ + 1 < s_.size() && s_[i_ + 1] == '=') {
      i_ += 2;
      return {Tok::kPunct, "!=", start};
    }
    if (std::string_view("{}().,;=*").find(c) != std::string_view::npos) {
      ++i_;
      return {Tok::kPunct, std::string(1, c), start};
    }
    if (std::isalpha(uc(c)) || c == ':' || c == '_') {
      const std::size_t b = i_;
      bool colon = false;
      while (i_ < s_.size() &&
             (std::isalnum(uc(s_[i_])) || s_[i_] == '_' || s_[i_] == '-' ||
              s_[i_] == ':' || (s_[i_] == '.' && colon && i_ + 1 < s_.size() &&
                                std::isalnum(uc(s_[i_ + 1]))))) {
        if (s_[i_] == ':') colon = true;
        ++i_;
      }
      std::string w(s_.substr(b, i_ - b));
      return {colon ? Tok::kPname : Tok::kWord, w, start};
    }
    fail(std::string("unexpected character '") + c + "'", start);
  }

  [[noreturn]] static void fail(const std::string& msg, std::size_t pos) {
    throw SyntaxError(msg, pos);
  }

 private:
  static unsigned char uc(char c) { return static_cast<unsigned char>(c); }

  void skip_space() {
    while (i_ < s_.size()) {
      if (std::isspace(uc(s_[i_]))) {
        ++i_;
      } else if (s_[i_] == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  Token literal(std::size_t start) {
    std::string lex;
    ++i_;
    bool closed = false;
    while (i_ < s_.size()) {
      const char c = s_[i_++];
      if (c == '\\') {
        if (i_ >= s_.size()) break;
        const char n = s_[i_++];
        switch (n) {
          case 'n': lex += '\n'; break;
          case 'r': lex += '\r'; break;
          case 't': lex += '\t'; break;
          case '"': lex += '"'; break;
          case '\\': lex += '\\'; break;
          default: fail("unsupported escape", i_ - 2);
        }
      } else if (c == '"') {
        closed = true;
        break;
      } else {
        lex += c;
      }
    }
    if (!closed) fail("unterminated literal", start);
    if (i_ + 1 < s_.size() && s_[i_] == '^' && s_[i_ + 1] == '^') {
      i_ += 2;
      // Datatype is resolved by the parser (IRI or prefixed name); encode the
      // lexical form and let it append.
      return {Tok::kLiteral, "T" + lex, start};
    }
    if (i_ < s_.size() && s_[i_] == '@') {
      const std::size_t b = ++i_;
      while (i_ < s_.size() && (std::isalnum(uc(s_[i_])) || s_[i_] == '-')) ++i_;
      return {Tok::kLiteral,
              Term::lang_literal(lex, s_.substr(b, i_ - b)).str(), start};
    }
    return {Tok::kLiteral, Term::literal(lex).str(), start};
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { advance(); }

  SelectQuery parse() {
    while (is_word("PREFIX")) prefix_decl();
    expect_word("SELECT");
    SelectQuery q;
    if (is_word("DISTINCT")) advance();
    if (is_punct("*")) Lexer::fail("SELECT * is not supported", cur_.pos);
    while (cur_.kind == Tok::kVar) {
      q.projected.push_back(Variable{cur_.text});
      advance();
    }
    if (q.projected.empty()) Lexer::fail("no projected variable", cur_.pos);
    if (is_word("WHERE")) advance();
    expect_punct("{");
    group(q);
    expect_punct("}");
    if (is_word("ORDER")) {
      advance();
      expect_word("BY");
      while (cur_.kind == Tok::kVar) advance();
    }
    while (is_word("LIMIT") || is_word("OFFSET")) {
      const bool lim = is_word("LIMIT");
      advance();
      if (cur_.kind != Tok::kInteger) Lexer::fail("expected integer", cur_.pos);
      const auto n = static_cast<std::size_t>(std::stoull(cur_.text));
      (lim ? q.limit : q.offset) = n;
      advance();
    }
    if (cur_.kind != Tok::kEnd) Lexer::fail("trailing input", cur_.pos);

    if (!q.patterns.empty()) {
      q.set_subject(q.patterns.front().subject);
    } else if (!q.filters.empty()) {
      q.set_subject(q.filters.front().var);
    } else {
      q.set_subject(q.projected.front());
    }
    for (const auto& p : q.patterns) {
      if (p.subject != q.subject()) {
        Lexer::fail("only star-shaped patterns on ?" + q.subject().name +
                        " are supported", 0);
      }
    }
    return q;
  }

 private:
  void advance() { cur_ = lex_.next(); }
  bool is_word(const char* w) const {
    return cur_.kind == Tok::kWord && upper(cur_.text) == w;
  }
  bool is_punct(const char* p) const {
    return cur_.kind == Tok::kPunct && cur_.text == p;
  }
  void expect_word(const char* w) {
    if (!is_word(w)) Lexer::fail(std::string("expected ") + w, cur_.pos);
    advance();
  }
  void expect_punct(const char* p) {
    if (!is_punct(p)) Lexer::fail(std::string("expected '") + p + "'", cur_.pos);
    advance();
  }

  void prefix_decl() {
    advance();
    if (cur_.kind != Tok::kPname || cur_.text.back() != ':') {
      Lexer::fail("expected prefix name", cur_.pos);
    }
    std::string name = cur_.text.substr(0, cur_.text.size() - 1);
    advance();
    if (cur_.kind != Tok::kIri) Lexer::fail("expected IRI", cur_.pos);
    prefixes_[name] = cur_.text;
    advance();
  }

  std::string resolve(const Token& t) const {
    if (t.kind == Tok::kIri) return t.text;
    const auto colon = t.text.find(':');
    const auto it = prefixes_.find(t.text.substr(0, colon));
    if (it == prefixes_.end()) {
      Lexer::fail("undeclared prefix in '" + t.text + "'", t.pos);
    }
    return it->second + t.text.substr(colon + 1);
  }

  Term term() {
    const Token t = cur_;
    advance();
    switch (t.kind) {
      case Tok::kIri:
      case Tok::kPname:
        return Term::iri(resolve(t));
      case Tok::kInteger:
        return Term::typed_literal(t.text, kXsdInteger);
      case Tok::kLiteral:
        if (t.text.front() == 'T') {
          if (cur_.kind != Tok::kIri && cur_.kind != Tok::kPname) {
            Lexer::fail("expected datatype IRI", cur_.pos);
          }
          const std::string dt = resolve(cur_);
          advance();
          return Term::typed_literal(t.text.substr(1), dt);
        }
        return Term::from_canonical(t.text);
      default:
        Lexer::fail("expected RDF term", t.pos);
    }
  }

  Variable var() {
    if (cur_.kind != Tok::kVar) Lexer::fail("expected variable", cur_.pos);
    Variable v{cur_.text};
    advance();
    return v;
  }

  void group(SelectQuery& q) {
    while (!is_punct("}")) {
      if (cur_.kind == Tok::kEnd) Lexer::fail("unterminated group", cur_.pos);
      if (is_word("FILTER")) {
        advance();
        filter(q);
      } else if (is_word("VALUES")) {
        advance();
        InstanceFilter f;
        f.var = var();
        expect_punct("{");
        while (!is_punct("}")) f.entities.push_back(term());
        advance();
        q.filters.push_back(std::move(f));
      } else if (cur_.kind == Tok::kVar) {
        triples(q);
      } else {
        Lexer::fail("unexpected token '" + cur_.text + "'", cur_.pos);
      }
    }
  }

  void triples(SelectQuery& q) {
    const Variable subject = var();
    while (true) {
      Term pred;
      if (cur_.kind == Tok::kWord && cur_.text == "a") {
        advance();
        pred = Term::iri(kRdfType);
      } else if (cur_.kind == Tok::kIri || cur_.kind == Tok::kPname) {
        pred = Term::iri(resolve(cur_));
        advance();
      } else {
        Lexer::fail("expected predicate IRI", cur_.pos);
      }
      TriplePattern p{subject, pred, Variable{}};
      if (cur_.kind == Tok::kVar) {
        p.object = var();
      } else {
        p.object = term();
      }
      q.patterns.push_back(std::move(p));
      if (is_punct(";")) {
        advance();
        if (is_punct(".") || is_punct("}")) break;
        continue;
      }
      break;
    }
    if (is_punct(".")) advance();
  }

  void filter(SelectQuery& q) {
    expect_punct("(");
    if (cur_.kind == Tok::kWord && upper(cur_.text) == "DATATYPE") {
      advance();
      expect_punct("(");
      ValueTest t{var(), ValueTest::Kind::kDatatype, {}};
      expect_punct(")");
      expect_punct("=");
      t.value = term();
      q.value_tests.push_back(std::move(t));
    } else {
      const Variable lhs = var();
      if (is_punct("!=")) {
        advance();
        q.inequalities.emplace_back(lhs, var());
      } else if (is_punct("=")) {
        advance();
        q.value_tests.push_back({lhs, ValueTest::Kind::kEquals, term()});
      } else if (is_word("NOT")) {
        advance();
        expect_word("IN");
        expect_punct("(");
        InstanceFilter f{lhs, FilterMode::kExclude, {}, {}, false};
        while (!is_punct(")")) {
          f.entities.push_back(term());
          if (is_punct(",")) advance();
        }
        advance();
        q.filters.push_back(std::move(f));
      } else {
        Lexer::fail("unsupported FILTER expression", cur_.pos);
      }
    }
    expect_punct(")");
  }

  Lexer lex_;
  Token cur_{Tok::kEnd, "", 0};
  std::map<std::string, std::string> prefixes_;
};

}  // namespace

SelectQuery parse_select(std::string_view text) { return Parser(text).parse(); }

}  // namespace travshacl
