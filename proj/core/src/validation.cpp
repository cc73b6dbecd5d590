#include "travshacl/validation.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <set>
#include <tuple>
#include <stdexcept>

#include "travshacl/dependency_graph.hpp"
#include "travshacl/errors.hpp"

namespace travshacl {

// ---------------------------------------------------------------------------
// Assignment

AtomId Assignment::intern(std::size_t shape, const Term& entity) {
  auto& index = by_shape_.at(shape);
  const auto it = index.find(entity);
  if (it != index.end()) return it->second;
  const auto id = static_cast<AtomId>(atoms_.size());
  atoms_.push_back(Atom{entity, shape});
  index.emplace(entity, id);
  in_order_[shape].push_back(id);
  return id;
}

std::optional<AtomId> Assignment::find(std::size_t shape, const Term& entity) const {
  const auto& index = by_shape_.at(shape);
  const auto it = index.find(entity);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

Verdict Assignment::verdict(std::size_t shape, const Term& entity) const {
  const auto a = find(shape, entity);
  return a ? atoms_[*a].verdict : Verdict::kUnknown;
}

bool Assignment::set(AtomId a, Verdict v) {
  Atom& atom = atoms_.at(a);
  if (atom.verdict == v) return false;
  if (atom.verdict != Verdict::kUnknown || v == Verdict::kUnknown) {
    throw std::logic_error("verdict of " + atom.entity.str() + " cannot change from " +
                           to_string(atom.verdict) + " to " + to_string(v));
  }
  if (finalized(atom.shape)) {
    throw std::logic_error("verdict change in finalized shape");
  }
  atom.verdict = v;
  transitions_.push_back(a);
  return true;
}

// ---------------------------------------------------------------------------
// Grounder

Grounder::Grounder(const ShapeSchema& schema, bool skip_invalidated)
    : schema_(schema),
      skip_invalidated_(skip_invalidated),
      assignment_(schema.size()),
      pending_atoms_(schema.size()) {}

AtomId Grounder::atom(std::size_t shape, const Term& entity) {
  const std::size_t before = assignment_.size();
  const AtomId a = assignment_.intern(shape, entity);
  if (assignment_.size() != before) {
    info_.emplace_back();
    pending_atoms_[shape].push_back(a);
  }
  return a;
}

std::vector<StateId> Grounder::states_of(AtomId a) const {
  std::vector<StateId> out;
  const AtomInfo& info = info_.at(a);
  if (!info.scheduled) return out;
  const std::size_t n = schema_.shapes()[assignment_.shape(a)].constraints.size();
  for (std::size_t i = 0; i < n; ++i) out.push_back(info.first_state + static_cast<StateId>(i));
  return out;
}

void Grounder::mark_targeted(AtomId a) {
  AtomInfo& info = info_.at(a);
  if (info.targeted) return;
  info.targeted = true;
  if (assignment_.verdict(a) != Verdict::kUnknown && on_decided) on_decided(a);
}

void Grounder::schedule(AtomId a) {
  AtomInfo& info = info_.at(a);
  if (info.scheduled) return;
  const Shape& shape = schema_.shapes()[assignment_.shape(a)];
  info.scheduled = true;
  info.first_state = static_cast<StateId>(states_.size());
  info.open = shape.constraints.size();
  for (std::size_t i = 0; i < shape.constraints.size(); ++i) {
    const Constraint& c = shape.constraints[i];
    ConstraintState st;
    st.owner = a;
    st.constraint = static_cast<std::uint32_t>(i);
    st.kind = c.kind;
    st.threshold = c.count;
    st.negated = c.shape_ref && c.shape_ref->negated;
    states_.push_back(st);
  }
}

std::vector<AtomId> Grounder::take_unscheduled(std::size_t shape) {
  std::vector<AtomId> out;
  for (AtomId a : pending_atoms_.at(shape)) {
    if (!info_[a].scheduled) out.push_back(a);
  }
  pending_atoms_[shape].clear();
  return out;
}

bool Grounder::has_unscheduled(std::size_t shape) const {
  return std::any_of(pending_atoms_.at(shape).begin(), pending_atoms_[shape].end(),
                     [&](AtomId a) { return !info_[a].scheduled; });
}

bool Grounder::skip(AtomId a) const {
  return skip_invalidated_ && assignment_.verdict(a) == Verdict::kFalse;
}

void Grounder::count_rule(std::size_t shape, bool support_edge) {
  ++ledger_.rules_grounded;
  if (support_edge) ++ledger_.support_edges;
  else ++ledger_.intra_checks;
  ++ledger_.rules_per_shape[schema_.shapes()[shape].name];
}

bool Grounder::counts(const ConstraintState& st, Verdict neighbour) const {
  return st.negated ? neighbour == Verdict::kFalse : neighbour == Verdict::kTrue;
}

void Grounder::decide_atom(AtomId a, Verdict v) {
  if (!assignment_.set(a, v)) return;
  worklist_.push_back(a);
  if (on_decided) on_decided(a);
}

void Grounder::decide_state(StateId s, Verdict v) {
  ConstraintState& st = states_[s];
  if (st.decided != Verdict::kUnknown) return;
  st.decided = v;
  if (v == Verdict::kFalse) {
    decide_atom(st.owner, Verdict::kFalse);
    return;
  }
  AtomInfo& info = info_[st.owner];
  if (--info.open == 0 && assignment_.verdict(st.owner) == Verdict::kUnknown) {
    decide_atom(st.owner, Verdict::kTrue);
  }
}

void Grounder::evaluate(StateId s) {
  const ConstraintState& st = states_[s];
  if (st.decided != Verdict::kUnknown) return;
  if (st.kind == ConstraintKind::kMin) {
    if (st.satisfied >= st.threshold) decide_state(s, Verdict::kTrue);
    else if (st.closed && st.satisfied + st.pending < st.threshold) decide_state(s, Verdict::kFalse);
  } else {
    if (st.satisfied > st.threshold) decide_state(s, Verdict::kFalse);
    else if (st.closed && st.pending == 0) decide_state(s, Verdict::kTrue);
  }
}

void Grounder::register_neighbour(StateId s, const Term& entity) {
  const ConstraintState& st = states_[s];
  const Shape& shape = schema_.shapes()[assignment_.shape(st.owner)];
  const Constraint& c = shape.constraints[st.constraint];
  const AtomId n = atom(schema_.index_of(c.shape_ref->shape), entity);
  if (!edges_.insert((static_cast<std::uint64_t>(s) << 32) | n).second) return;
  count_rule(assignment_.shape(st.owner), true);
  const Verdict v = assignment_.verdict(n);
  if (v == Verdict::kUnknown) {
    ++states_[s].pending;
    watchers_[n].push_back(s);
  } else if (counts(st, v)) {
    ++states_[s].satisfied;
  }
  evaluate(s);
}

std::vector<AtomId> Grounder::ground_targets(std::size_t shape, const ResultSet& rows) {
  std::vector<AtomId> out;
  if (rows.rows.empty()) return out;
  const std::size_t xcol = rows.column(Variable{"x"});
  for (const auto& row : rows.rows) {
    const Term& x = row[xcol];
    ledger_.entities_retrieved.insert(x);
    const AtomId a = atom(shape, x);
    const bool fresh = !info_[a].scheduled;
    schedule(a);
    mark_targeted(a);
    if (fresh) out.push_back(a);
  }
  return out;
}

void Grounder::ground_rows(std::size_t shape, const QueryPlan& plan, const ResultSet& rows) {
  if (rows.rows.empty()) return;
  const Shape& sh = schema_.shapes()[shape];
  const std::size_t xcol = rows.column(Variable{"x"});
  std::vector<std::pair<std::size_t, std::size_t>> ncols;  // constraint, column
  for (const auto& [c, var] : plan.neighbor_vars) ncols.emplace_back(c, rows.column(var));

  for (const auto& row : rows.rows) {
    for (const auto& t : row) ledger_.entities_retrieved.insert(t);
    const auto a = assignment_.find(shape, row[xcol]);
    if (!a || !info_[*a].scheduled) continue;
    if (skip(*a)) {
      ++ledger_.skipped_rows;
      continue;
    }
    // info_ may grow while neighbours are registered; keep indices only.
    const StateId first = info_[*a].first_state;
    if (plan.role == ShapeQuery::Role::kMin) {
      if (!info_[*a].min_seen) {
        info_[*a].min_seen = true;
        for (std::size_t i = 0; i < sh.constraints.size(); ++i) {
          const Constraint& c = sh.constraints[i];
          if (c.kind != ConstraintKind::kMin || c.is_inter_shape()) continue;
          count_rule(shape, false);
          decide_state(first + static_cast<StateId>(i), Verdict::kTrue);
        }
      }
      for (const auto& [c, col] : ncols) {
        register_neighbour(first + static_cast<StateId>(c), row[col]);
      }
    } else if (plan.role == ShapeQuery::Role::kMax) {
      const StateId s = first + static_cast<StateId>(plan.constraint);
      if (sh.constraints[plan.constraint].is_inter_shape()) {
        for (const auto& [c, col] : ncols) register_neighbour(s, row[col]);
      } else if (states_[s].decided == Verdict::kUnknown) {
        count_rule(shape, false);
        decide_state(s, Verdict::kFalse);
      }
    }
  }
}

void Grounder::close_plan(std::size_t shape, const QueryPlan& plan,
                          const std::vector<AtomId>& scope) {
  const Shape& sh = schema_.shapes()[shape];
  for (AtomId a : scope) {
    AtomInfo& info = info_[a];
    if (!info.scheduled) continue;
    if (plan.role == ShapeQuery::Role::kMin) {
      if (!info.min_seen) {
        // Not among the answers: some min constraint has too few values.
        decide_atom(a, Verdict::kFalse);
        continue;
      }
      for (std::size_t i = 0; i < sh.constraints.size(); ++i) {
        const Constraint& c = sh.constraints[i];
        if (c.kind != ConstraintKind::kMin || !c.is_inter_shape()) continue;
        const StateId s = info.first_state + static_cast<StateId>(i);
        states_[s].closed = true;
        evaluate(s);
      }
    } else if (plan.role == ShapeQuery::Role::kMax) {
      const StateId s = info.first_state + static_cast<StateId>(plan.constraint);
      if (sh.constraints[plan.constraint].is_inter_shape()) {
        states_[s].closed = true;
        evaluate(s);
      } else if (states_[s].decided == Verdict::kUnknown && !skip(a)) {
        count_rule(shape, false);
        decide_state(s, Verdict::kTrue);
      }
    }
  }
}

void Grounder::ground_shape(std::size_t shape, const ResultSet& target_rows,
                            const ResultSet& min_rows,
                            const std::vector<std::pair<std::size_t, ResultSet>>& max_rows) {
  const Shape& sh = schema_.shapes()[shape];
  std::vector<AtomId> scope = ground_targets(shape, target_rows);
  if (sh.min_count() > 0) {
    const ShapeQuery q = gen_min_query(sh);
    QueryPlan plan;
    plan.role = q.role;
    plan.neighbor_vars = q.neighbor_vars;
    ground_rows(shape, plan, min_rows);
    close_plan(shape, plan, scope);
  }
  for (const auto& q : gen_max_queries(sh)) {
    QueryPlan plan;
    plan.role = q.role;
    plan.constraint = q.constraint;
    plan.neighbor_vars = q.neighbor_vars;
    for (const auto& [c, rows] : max_rows) {
      if (c == q.constraint) ground_rows(shape, plan, rows);
    }
    close_plan(shape, plan, scope);
  }
}

std::size_t Grounder::propagate(AtomId a) {
  AtomInfo& info = info_[a];
  if (info.propagated) return 0;
  const Verdict v = assignment_.verdict(a);
  if (v == Verdict::kUnknown) return 0;
  info.propagated = true;
  const auto it = watchers_.find(a);
  if (it == watchers_.end()) return 0;
  const std::vector<StateId> waiting = std::move(it->second);
  watchers_.erase(it);
  for (StateId s : waiting) {
    ConstraintState& st = states_[s];
    --st.pending;
    if (counts(st, v)) ++st.satisfied;
    evaluate(s);
  }
  return waiting.size();
}

std::size_t Grounder::saturate() {
  std::size_t updated = 0;
  std::size_t head = 0;
  while (head < worklist_.size()) updated += propagate(worklist_[head++]);
  worklist_.clear();
  return updated;
}

std::size_t Grounder::early_invalidate(AtomId a) {
  if (assignment_.verdict(a) == Verdict::kUnknown) decide_atom(a, Verdict::kFalse);
  const std::size_t direct = propagate(a);
  saturate();
  return direct;
}

void Grounder::close_unknown(const std::vector<std::size_t>& shapes) {
  for (std::size_t s : shapes) {
    for (AtomId a : assignment_.atoms_of(s)) {
      if (assignment_.verdict(a) == Verdict::kUnknown) decide_atom(a, Verdict::kFalse);
    }
  }
  saturate();
}

// ---------------------------------------------------------------------------
// Runner

namespace {

std::vector<Term> sorted_terms(std::vector<Term> v) {
  std::sort(v.begin(), v.end());
  return v;
}

class Runner {
 public:
  Runner(const ShapeSchema& schema, GraphSource& source, const ValidationConfig& config)
      : schema_(schema),
        source_(source),
        config_(config),
        grounder_(schema, config.rewriting),
        processed_(schema.size(), false),
        start_(std::chrono::steady_clock::now()) {}

  ValidationResult run() {
    ValidationResult result;
    const SourceStats before = source_.stats();
    result.trace.config = describe_config();
    if (schema_.empty()) return result;

    const DependencyGraph graph = build_dependency_graph(schema_);
    const auto strata = stratify(graph);
    result.plan =
        config_.rewriting ? plan_traversal(schema_, config_.planner) : declaration_order(schema_);
    for (const auto& name : result.plan.order) order_.push_back(schema_.index_of(name));
    compute_ancestors(graph);

    grounder_.on_decided = [&](AtomId a) {
      if (!grounder_.targeted(a)) return;
      const Assignment& asg = grounder_.assignment();
      result.trace.entries.push_back(TraceEntry{elapsed(), asg.entity(a),
                                                schema_.shapes()[asg.shape(a)].name,
                                                asg.verdict(a)});
    };

    try {
      for (std::size_t s : order_) {
        process_shape(s);
        drain_lazy();
        check_finalized();
      }
      for (const auto& stratum : strata) {
        std::vector<std::size_t> idx;
        for (const auto& name : stratum) idx.push_back(schema_.index_of(name));
        grounder_.close_unknown(idx);
        check_finalized();
      }
    } catch (const TransportError& e) {
      result.partial = true;
      result.error = e.what();
      result.trace.partial = true;
      emit(std::string("run aborted: ") + e.what());
    }

    const Assignment& asg = grounder_.assignment();
    for (std::size_t s = 0; s < schema_.size(); ++s) {
      std::vector<VerdictRecord> rows;
      for (AtomId a : asg.atoms_of(s)) {
        if (grounder_.targeted(a)) {
          rows.push_back({asg.entity(a), schema_.shapes()[s].name, asg.verdict(a)});
        }
      }
      std::sort(rows.begin(), rows.end(),
                [](const VerdictRecord& a, const VerdictRecord& b) { return a.entity < b.entity; });
      result.verdicts.insert(result.verdicts.end(), rows.begin(), rows.end());
    }

    const GroundingLedger& ledger = grounder_.ledger();
    result.rules_grounded = ledger.rules_grounded;
    result.support_edges = ledger.support_edges;
    result.intra_checks = ledger.intra_checks;
    result.skipped_rows = ledger.skipped_rows;
    result.entities_retrieved = ledger.entities_retrieved.size();
    result.rules_per_shape = ledger.rules_per_shape;
    result.queries = source_.stats().queries - before.queries;
    result.rows = source_.stats().rows - before.rows;
    result.trace.run_seconds = elapsed();
    return result;
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  std::string describe_config() const {
    std::string s = config_.rewriting ? describe(config_.planner) : "baseline";
    if (!config_.paging) s += " unpaged";
    return s;
  }

  void emit(const std::string& msg) const {
    if (config_.on_event) config_.on_event(msg);
  }

  void compute_ancestors(const DependencyGraph& graph) {
    ancestors_.assign(schema_.size(), {});
    std::vector<std::vector<std::size_t>> referenced_by(schema_.size());
    for (const auto& e : graph.edges) {
      referenced_by[schema_.index_of(e.to)].push_back(schema_.index_of(e.from));
    }
    for (std::size_t s = 0; s < schema_.size(); ++s) {
      std::vector<bool> seen(schema_.size(), false);
      std::vector<std::size_t> stack{s};
      while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t w : referenced_by[u]) {
          if (!seen[w]) {
            seen[w] = true;
            ancestors_[s].push_back(w);
            stack.push_back(w);
          }
        }
      }
    }
  }

  void run_plan(const QueryPlan& plan, const PageCallback& on_page) {
    evaluate_all_pages(source_, plan, on_page, config_.paging);
  }

  void process_shape(std::size_t s) {
    processed_[s] = true;
    const Shape& shape = schema_.shapes()[s];
    if (!shape.target) return;
    const QueryPlan plan = partition_plan(gen_target_query(shape), config_.max_query_len,
                                          config_.max_parts, config_.page_size);
    std::vector<AtomId> scope;
    run_plan(plan, [&](const ResultSet& page) {
      const auto atoms = grounder_.ground_targets(s, page);
      scope.insert(scope.end(), atoms.begin(), atoms.end());
      grounder_.saturate();
    });
    evaluate_scope(s, scope, false);
  }

  QueryScope scope_of(const std::vector<AtomId>& atoms) const {
    std::vector<Term> terms;
    for (AtomId a : atoms) terms.push_back(grounder_.assignment().entity(a));
    return QueryScope::of(sorted_terms(std::move(terms)));
  }

  void evaluate_scope(std::size_t s, const std::vector<AtomId>& scope, bool lazy) {
    if (scope.empty()) return;
    const Shape& shape = schema_.shapes()[s];
    const QueryScope qscope = lazy ? scope_of(scope) : QueryScope::targets();

    std::vector<ShapeQuery> queries;
    if (shape.min_count() > 0) queries.push_back(gen_min_query(shape, qscope));
    for (auto& q : gen_max_queries(shape, qscope)) queries.push_back(std::move(q));

    std::vector<QueryPlan> plans;
    for (auto& sq : queries) {
      if (config_.rewriting) {
        for (const auto& [c, var] : sq.neighbor_vars) {
          sq.query = push_filter(sq.query, shape.constraints[c], var, lazy);
        }
      }
      plans.push_back(
          partition_plan(sq, config_.max_query_len, config_.max_parts, config_.page_size));
    }
    if (config_.rewriting) plans = order_query_plans(std::move(plans));

    for (const auto& plan : plans) {
      run_plan(plan, [&](const ResultSet& page) {
        grounder_.ground_rows(s, plan, page);
        grounder_.saturate();
      });
      grounder_.close_plan(s, plan, scope);
      grounder_.saturate();
    }
  }

  // Decided neighbours of constraint `c`, split into those that count towards
  // it and those that do not.
  std::pair<std::vector<Term>, std::vector<Term>> decided_lists(const Constraint& c) const {
    const std::size_t t = schema_.index_of(c.shape_ref->shape);
    const Assignment& asg = grounder_.assignment();
    std::vector<Term> counting, other;
    for (AtomId a : asg.atoms_of(t)) {
      const Verdict v = asg.verdict(a);
      if (v == Verdict::kUnknown) continue;
      const bool counts = c.shape_ref->negated ? v == Verdict::kFalse : v == Verdict::kTrue;
      (counts ? counting : other).push_back(asg.entity(a));
    }
    return {sorted_terms(std::move(counting)), sorted_terms(std::move(other))};
  }

  // The exclusion form is always sound. The inclusion form is used only after
  // a discovery query shows every neighbour the query can bind is decided.
  SelectQuery push_filter(SelectQuery q, const Constraint& c, const Variable& var, bool lazy) {
    auto [counting, other] = decided_lists(c);
    if (other.empty()) return q;
    bool allow_include = false;
    if (!lazy && counting.size() < other.size()) {
      allow_include = discover_and_decide(q, c, var);
      if (allow_include) std::tie(counting, other) = decided_lists(c);
    }
    return push_instance_filter(std::move(q), counting, other, var, c.shape_ref->shape,
                                allow_include);
  }

  bool discover_and_decide(const SelectQuery& q, const Constraint& c, const Variable& var) {
    const std::size_t t = schema_.index_of(c.shape_ref->shape);
    SelectQuery discovery = q;
    discovery.projected = {var};
    const QueryPlan plan = partition_plan(discovery, config_.max_query_len, config_.max_parts,
                                          config_.page_size);
    std::vector<AtomId> found;
    run_plan(plan, [&](const ResultSet& page) {
      for (const auto& row : page.rows) found.push_back(grounder_.atom(t, row.front()));
    });
    drain_lazy();
    const Assignment& asg = grounder_.assignment();
    return std::all_of(found.begin(), found.end(),
                       [&](AtomId a) { return asg.verdict(a) != Verdict::kUnknown; });
  }

  void drain_lazy() {
    if (draining_) return;
    draining_ = true;
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t s : order_) {
        if (!processed_[s]) continue;
        const auto atoms = grounder_.take_unscheduled(s);
        if (atoms.empty()) continue;
        for (AtomId a : atoms) grounder_.schedule(a);
        evaluate_scope(s, atoms, true);
        progress = true;
      }
    }
    draining_ = false;
  }

  void check_finalized() {
    Assignment& asg = grounder_.assignment();
    for (std::size_t s : order_) {
      if (asg.finalized(s) || !processed_[s] || grounder_.has_unscheduled(s)) continue;
      if (!std::all_of(ancestors_[s].begin(), ancestors_[s].end(),
                       [&](std::size_t u) { return processed_[u]; })) {
        continue;
      }
      std::size_t valid = 0, invalid = 0;
      bool complete = true;
      for (AtomId a : asg.atoms_of(s)) {
        const Verdict v = asg.verdict(a);
        if (v == Verdict::kUnknown) {
          complete = false;
          break;
        }
        if (!grounder_.targeted(a)) continue;
        (v == Verdict::kTrue ? valid : invalid)++;
      }
      if (!complete) continue;
      asg.finalize(s);
      emit("shape " + schema_.shapes()[s].name + " finalized: " + std::to_string(valid) +
           " valid, " + std::to_string(invalid) + " invalid");
    }
  }

  const ShapeSchema& schema_;
  GraphSource& source_;
  const ValidationConfig& config_;
  Grounder grounder_;
  std::vector<bool> processed_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<std::size_t>> ancestors_;
  bool draining_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

ValidationResult run_validation(const ShapeSchema& schema, GraphSource& source,
                                const ValidationConfig& config) {
  return Runner(schema, source, config).run();
}

// ---------------------------------------------------------------------------
// Reference evaluation

std::vector<VerdictRecord> reference_verdicts(const ShapeSchema& schema, const Graph& graph) {
  const std::size_t n = schema.size();
  std::vector<std::map<Term, Verdict>> verdicts(n);
  std::vector<std::set<Term>> targets(n);

  std::deque<std::pair<std::size_t, Term>> queue;
  for (std::size_t s = 0; s < n; ++s) {
    const Shape& shape = schema.shapes()[s];
    if (!shape.target) continue;
    for (const auto& row : evaluate_unbounded(graph, gen_target_query(shape).query).rows) {
      targets[s].insert(row.front());
      if (verdicts[s].emplace(row.front(), Verdict::kFalse).second) {
        queue.emplace_back(s, row.front());
      }
    }
  }

  auto values = [&](const Term& x, const Constraint& c) {
    std::vector<Term> out;
    const auto xid = graph.id_of(x);
    const auto pid = graph.id_of(c.path);
    if (!xid || !pid) return out;
    for (auto oid : graph.objects(*pid, *xid)) {
      const Term& o = graph.term(oid);
      if (c.value_filter) {
        if (c.value_filter->kind == ValueFilter::Kind::kConstant) {
          if (o != c.value_filter->value) continue;
        } else if (!o.is_literal() || o.datatype() != c.value_filter->value.iri_value()) {
          continue;
        }
      }
      out.push_back(o);
    }
    return out;
  };

  // Every atom reachable through references.
  while (!queue.empty()) {
    const auto [s, x] = queue.front();
    queue.pop_front();
    for (const auto& c : schema.shapes()[s].constraints) {
      if (!c.shape_ref) continue;
      const std::size_t t = schema.index_of(c.shape_ref->shape);
      for (const auto& o : values(x, c)) {
        if (verdicts[t].emplace(o, Verdict::kFalse).second) queue.emplace_back(t, o);
      }
    }
  }

  auto holds = [&](std::size_t s, const Term& x) {
    for (const auto& c : schema.shapes()[s].constraints) {
      std::size_t k = 0;
      for (const auto& o : values(x, c)) {
        if (!c.shape_ref) {
          ++k;
          continue;
        }
        const Verdict v = verdicts[schema.index_of(c.shape_ref->shape)].at(o);
        if (c.shape_ref->negated ? v == Verdict::kFalse : v == Verdict::kTrue) ++k;
      }
      if (c.kind == ConstraintKind::kMin ? k < c.count : k > c.count) return false;
    }
    return true;
  };

  // Least fixed point per stratum, lower strata first.
  for (const auto& stratum : stratify(build_dependency_graph(schema))) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& name : stratum) {
        const std::size_t s = schema.index_of(name);
        for (auto& [x, v] : verdicts[s]) {
          if (v == Verdict::kFalse && holds(s, x)) {
            v = Verdict::kTrue;
            changed = true;
          }
        }
      }
    }
  }

  std::vector<VerdictRecord> out;
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& x : targets[s]) {
      out.push_back({x, schema.shapes()[s].name, verdicts[s].at(x)});
    }
  }
  return out;
}

}  // namespace travshacl
