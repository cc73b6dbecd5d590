#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "travshacl/query.hpp"
#include "travshacl/term.hpp"

namespace travshacl {

/// In-memory RDF graph with set semantics. Terms are interned; the two
/// indexes (predicate+subject -> objects, predicate+object -> subjects) serve
/// star-shaped pattern evaluation.
class Graph {
 public:
  using Id = std::uint32_t;

  // Returns false when the triple was already present.
  bool add(const Term& subject, const Term& predicate, const Term& object);

  std::size_t triple_count() const noexcept { return triples_.size(); }
  // |V_G|: distinct terms in subject or object position.
  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t subject_count() const noexcept { return subject_count_; }

  std::optional<Id> id_of(const Term& t) const;
  const Term& term(Id id) const { return terms_[id]; }

  std::span<const Id> objects(Id predicate, Id subject) const;
  std::span<const Id> subjects(Id predicate, Id object) const;
  // Distinct subjects having at least one triple with `predicate`.
  std::span<const Id> subjects_with(Id predicate) const;

  struct Triple {
    Id s, p, o;
  };
  const std::vector<Triple>& triples() const noexcept { return triple_list_; }

 private:
  Id intern(const Term& t);
  static std::uint64_t key(Id a, Id b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept {
      std::uint64_t h = key(t.s, t.p) * 0x9E3779B97F4A7C15ULL;
      return static_cast<std::size_t>(h ^ (t.o + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2)));
    }
  };
  struct TripleEq {
    bool operator()(const Triple& a, const Triple& b) const noexcept {
      return a.s == b.s && a.p == b.p && a.o == b.o;
    }
  };

  std::vector<Term> terms_;
  std::unordered_map<Term, Id> ids_;
  std::unordered_set<Triple, TripleHash, TripleEq> triples_;
  std::vector<Triple> triple_list_;
  std::unordered_map<std::uint64_t, std::vector<Id>> ps_index_;
  std::unordered_map<std::uint64_t, std::vector<Id>> po_index_;
  std::unordered_map<Id, std::vector<Id>> predicate_subjects_;
  std::vector<std::uint8_t> role_;  // bit 0: subject, bit 1: object
  std::size_t node_count_ = 0;
  std::size_t subject_count_ = 0;
};

/// Reads N-Triples. Blank nodes are skolemized to `urn:bnode:<label>` IRIs so
/// they can appear in query filters. Throws SyntaxError carrying the 1-based
/// line number.
Graph load_ntriples(std::istream& in);
Graph load_ntriples_file(const std::string& path);
Graph load_ntriples_text(std::string_view text);

/// Answers of a query: one column per projected variable.
struct ResultSet {
  std::vector<Variable> variables;
  std::vector<std::vector<Term>> rows;

  std::size_t column(const Variable& v) const;
  bool empty() const noexcept { return rows.empty(); }
  std::size_t size() const noexcept { return rows.size(); }
};

/// Full ordered answer of a star query over the graph, ignoring LIMIT/OFFSET.
/// Rows are distinct and sorted by the projected columns, in order.
ResultSet evaluate_unbounded(const Graph& graph, const SelectQuery& query);

}  // namespace travshacl
