#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "travshacl/graph.hpp"
#include "travshacl/metrics.hpp"
#include "travshacl/planner.hpp"
#include "travshacl/query_builder.hpp"
#include "travshacl/schema.hpp"
#include "travshacl/source.hpp"

namespace travshacl {

using AtomId = std::uint32_t;
using StateId = std::uint32_t;

/// Three-valued assignment over (entity, shape) atoms. Verdicts move from
/// UNKNOWN to TRUE or FALSE exactly once; a flip throws std::logic_error.
class Assignment {
 public:
  explicit Assignment(std::size_t shape_count = 0)
      : by_shape_(shape_count), in_order_(shape_count) {}

  AtomId intern(std::size_t shape, const Term& entity);
  std::optional<AtomId> find(std::size_t shape, const Term& entity) const;
  std::size_t size() const noexcept { return atoms_.size(); }

  Verdict verdict(AtomId a) const { return atoms_[a].verdict; }
  Verdict verdict(std::size_t shape, const Term& entity) const;
  const Term& entity(AtomId a) const { return atoms_[a].entity; }
  std::size_t shape(AtomId a) const { return atoms_[a].shape; }

  // Returns false when the atom already had this verdict.
  bool set(AtomId a, Verdict v);

  // Atoms of a shape in creation order.
  const std::vector<AtomId>& atoms_of(std::size_t shape) const { return in_order_.at(shape); }
  // Decisions in the order they happened.
  const std::vector<AtomId>& transitions() const noexcept { return transitions_; }

  void finalize(std::size_t shape) { finalized_.insert(shape); }
  bool finalized(std::size_t shape) const { return finalized_.contains(shape); }

 private:
  struct Atom {
    Term entity;
    std::size_t shape;
    Verdict verdict = Verdict::kUnknown;
  };
  std::vector<Atom> atoms_;
  std::vector<std::unordered_map<Term, AtomId>> by_shape_;
  std::vector<std::vector<AtomId>> in_order_;
  std::vector<AtomId> transitions_;
  std::unordered_set<std::size_t> finalized_;
};

/// Counting form of the grounded rules of one constraint of one atom.
struct ConstraintState {
  AtomId owner = 0;
  std::uint32_t constraint = 0;
  ConstraintKind kind = ConstraintKind::kMin;
  std::size_t threshold = 0;
  bool negated = false;
  std::size_t satisfied = 0;
  std::size_t pending = 0;  // neighbours whose verdict is still UNKNOWN
  bool closed = false;      // every neighbour has been registered
  Verdict decided = Verdict::kUnknown;
};

struct GroundingLedger {
  std::size_t rules_grounded = 0;
  std::size_t support_edges = 0;
  std::size_t intra_checks = 0;
  std::size_t skipped_rows = 0;
  std::unordered_set<Term> entities_retrieved;
  std::map<std::string, std::size_t> rules_per_shape;
};

/// Grounding and saturation state for one run, independent of where the
/// answers come from.
class Grounder {
 public:
  // With `skip_invalidated`, rows and checks whose atom is already FALSE are
  // ignored (early invalidation). Without it every row is grounded.
  explicit Grounder(const ShapeSchema& schema, bool skip_invalidated = true);

  const ShapeSchema& schema() const noexcept { return schema_; }
  Assignment& assignment() noexcept { return assignment_; }
  const Assignment& assignment() const noexcept { return assignment_; }
  const GroundingLedger& ledger() const noexcept { return ledger_; }
  const ConstraintState& state(StateId s) const { return states_[s]; }
  // States of a scheduled atom, one per constraint in declaration order.
  std::vector<StateId> states_of(AtomId a) const;

  AtomId atom(std::size_t shape, const Term& entity);
  bool scheduled(AtomId a) const { return info_[a].scheduled; }
  bool targeted(AtomId a) const { return info_[a].targeted; }
  void mark_targeted(AtomId a);
  // Creates the constraint states of an atom. Idempotent.
  void schedule(AtomId a);
  // Atoms created by references and not yet scheduled; clears the backlog.
  std::vector<AtomId> take_unscheduled(std::size_t shape);
  bool has_unscheduled(std::size_t shape) const;

  // Target rows: every ?x becomes a targeted, scheduled atom.
  std::vector<AtomId> ground_targets(std::size_t shape, const ResultSet& rows);
  // Rows of a min or max query of `shape`.
  void ground_rows(std::size_t shape, const QueryPlan& plan, const ResultSet& rows);
  // Called once a plan is exhausted for the atoms in `scope`.
  void close_plan(std::size_t shape, const QueryPlan& plan, const std::vector<AtomId>& scope);

  /// Convenience form of a full pass over one shape's answers.
  void ground_shape(std::size_t shape, const ResultSet& target_rows, const ResultSet& min_rows,
                    const std::vector<std::pair<std::size_t, ResultSet>>& max_rows);

  /// Propagates pending decisions until nothing changes. Returns the number of
  /// constraint states updated.
  std::size_t saturate();
  /// Propagates a FALSE atom into every state that waits on it, cascading.
  /// Returns the number of states that had it pending.
  std::size_t early_invalidate(AtomId a);
  /// Minimal-model closure: every UNKNOWN atom of these shapes becomes FALSE.
  void close_unknown(const std::vector<std::size_t>& shapes);

  // Observer for every atom decision, in order.
  std::function<void(AtomId)> on_decided;

 private:
  struct AtomInfo {
    bool scheduled = false;
    bool targeted = false;
    bool propagated = false;
    bool min_seen = false;
    StateId first_state = 0;
    std::size_t open = 0;
  };

  void decide_atom(AtomId a, Verdict v);
  void decide_state(StateId s, Verdict v);
  void evaluate(StateId s);
  bool counts(const ConstraintState& st, Verdict neighbour) const;
  void register_neighbour(StateId s, const Term& entity);
  std::size_t propagate(AtomId a);
  bool skip(AtomId a) const;
  void count_rule(std::size_t shape, bool support_edge);

  const ShapeSchema& schema_;
  bool skip_invalidated_;
  Assignment assignment_;
  std::vector<AtomInfo> info_;
  std::vector<ConstraintState> states_;
  std::unordered_map<AtomId, std::vector<StateId>> watchers_;
  std::unordered_set<std::uint64_t> edges_;  // (state << 32) | neighbour
  std::vector<std::vector<AtomId>> pending_atoms_;
  std::vector<AtomId> worklist_;
  GroundingLedger ledger_;
};

struct VerdictRecord {
  Term entity;
  std::string shape;
  Verdict verdict = Verdict::kUnknown;
  friend bool operator==(const VerdictRecord&, const VerdictRecord&) = default;
};

struct ValidationConfig {
  PlannerConfig planner;
  // Filter pushing, query reordering and early invalidation. Off gives the
  // baseline: declaration order and every row grounded.
  bool rewriting = true;
  // Page every query with LIMIT/OFFSET. Off is a diagnostic mode that loses
  // answers beyond the source's cap.
  bool paging = true;
  std::size_t page_size = kDefaultPageSize;
  std::size_t max_query_len = kDefaultMaxQueryLength;
  std::size_t max_parts = kDefaultMaxParts;
  // Progress messages (shape finalized, closure, ...).
  std::function<void(const std::string&)> on_event;
};

struct ValidationResult {
  // Targeted atoms sorted by shape declaration order, then entity.
  std::vector<VerdictRecord> verdicts;
  AnswerTrace trace;
  TraversalPlan plan;
  std::size_t rules_grounded = 0;
  std::size_t support_edges = 0;
  std::size_t intra_checks = 0;
  std::size_t skipped_rows = 0;
  std::size_t entities_retrieved = 0;
  std::map<std::string, std::size_t> rules_per_shape;
  std::size_t queries = 0;
  std::size_t rows = 0;
  bool partial = false;
  std::string error;
};

/// Validates every targeted entity of `schema` against `source`. Throws
/// NegativeCycleError for unstratifiable schemas; transport failures end the
/// run early with `partial` set and the verdicts found so far.
ValidationResult run_validation(const ShapeSchema& schema, GraphSource& source,
                                const ValidationConfig& config = {});

/// Straightforward per-entity evaluation over an in-memory graph: targets by
/// query, constraints by counting objects, least fixed point per stratum.
std::vector<VerdictRecord> reference_verdicts(const ShapeSchema& schema, const Graph& graph);

}  // namespace travshacl
