#include "travshacl/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "travshacl/errors.hpp"
#include "travshacl/graph.hpp"
#include "travshacl/report.hpp"

namespace travshacl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVocab = "http://example.org/ub#";
constexpr const char* kData = "http://example.org/data/";
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct PropSpec {
  std::string path;
  std::size_t min = 1;
  std::size_t max = 1;
  std::string datatype;  // empty: plain string
};

struct RefSpec {
  std::string path;
  std::size_t target;  // class index
};

struct ClassSpec {
  std::string name;
  std::vector<RefSpec> refs;
  std::vector<PropSpec> props;
  std::size_t per_department = 0;  // 0 for universities and departments
};

struct Tier {
  std::vector<ClassSpec> classes;  // 0: University, 1: Department
  std::vector<std::vector<Constraint>> constraints;
  std::size_t departments_per_university = 5;
};

std::size_t tier_schema_index(const Tier& t, const std::string& name) {
  for (std::size_t i = 0; i < t.classes.size(); ++i) {
    if (t.classes[i].name == name) return i;
  }
  throw Error("unknown class " + name);
}

std::string vocab(const std::string& local) { return kVocab + local; }

PropSpec prop(std::string path, std::size_t min = 1, std::size_t max = 1, std::string dt = {}) {
  return {vocab(path), min, max, dt.empty() ? dt : std::string(kXsdInteger)};
}

std::vector<ClassSpec> lubm_classes() {
  enum { U, D, FP, AP, GS, UG, CO, SP, LE, GC, RG, PU, TA, RA };
  const auto name = prop("name");
  const auto email = prop("emailAddress");
  const auto phone = prop("telephone");
  const auto sid = prop("studentId", 1, 1, "int");
  return {
      {"University", {}, {name, prop("url"), prop("foundedYear", 1, 1, "int"), prop("motto")}, 0},
      {"Department",
       {{vocab("subOrganizationOf"), U}},
       {name, prop("url"), prop("budget", 1, 1, "int"), phone},
       0},
      {"FullProfessor",
       {{vocab("worksFor"), D}, {vocab("doctoralDegreeFrom"), U}},
       {name, email, prop("researchInterest", 2, 4), phone},
       4},
      {"AssociateProfessor",
       {{vocab("worksFor"), D}, {vocab("doctoralDegreeFrom"), U}},
       {name, email, prop("researchInterest", 2, 4), phone},
       4},
      {"GraduateStudent",
       {{vocab("memberOf"), D}, {vocab("advisor"), FP}, {vocab("undergraduateDegreeFrom"), U}},
       {name, email, sid},
       10},
      {"UndergraduateStudent",
       {{vocab("memberOf"), D}, {vocab("takesCourse"), CO}},
       {name, email, sid},
       24},
      {"Course",
       {{vocab("teacher"), FP}},
       {name, prop("courseCode"), prop("credits", 1, 1, "int"), prop("description")},
       8},
      {"AssistantProfessor",
       {{vocab("worksFor"), D}, {vocab("doctoralDegreeFrom"), U}},
       {name, email, prop("researchInterest", 1, 3), phone},
       3},
      {"Lecturer", {{vocab("worksFor"), D}}, {name, email, phone, prop("office")}, 2},
      {"GraduateCourse",
       {{vocab("teacher"), AP}},
       {name, prop("courseCode"), prop("credits", 1, 1, "int"), prop("description")},
       4},
      {"ResearchGroup",
       {{vocab("subOrganizationOf"), D}},
       {name, prop("url"), prop("topic"), phone},
       2},
      {"Publication",
       {{vocab("publicationAuthor"), FP}},
       {prop("title"), prop("year", 1, 1, "int"), prop("venue"), prop("doi")},
       8},
      {"TeachingAssistant",
       {{vocab("teachingAssistantOf"), CO}, {vocab("memberOf"), D}},
       {name, email, sid},
       2},
      {"ResearchAssistant",
       {{vocab("worksFor"), RG}, {vocab("memberOf"), D}},
       {name, email, sid},
       2},
  };
}

// Candidate constraints of a class: references first, then min/max per
// property.
std::vector<Constraint> candidates(const ClassSpec& c, const std::vector<ClassSpec>& classes) {
  std::vector<Constraint> out;
  for (const auto& r : c.refs) {
    Constraint k;
    k.kind = ConstraintKind::kMin;
    k.count = 1;
    k.path = Term::iri(r.path);
    k.shape_ref = ShapeRef{classes[r.target].name, false};
    out.push_back(std::move(k));
  }
  for (const auto& p : c.props) {
    Constraint mn;
    mn.kind = ConstraintKind::kMin;
    mn.count = p.min;
    mn.path = Term::iri(p.path);
    if (!p.datatype.empty()) {
      mn.value_filter = ValueFilter{ValueFilter::Kind::kDatatype, Term::iri(p.datatype)};
    }
    out.push_back(mn);
    Constraint mx;
    mx.kind = ConstraintKind::kMax;
    mx.count = p.max;
    mx.path = Term::iri(p.path);
    out.push_back(std::move(mx));
  }
  return out;
}

Tier make_tier(std::size_t size) {
  Tier t;
  if (size == 4) {
    enum { U, D, P };
    const auto name = prop("name");
    t.classes = {
        {"University", {}, {name}, 0},
        {"Department", {{vocab("subOrganizationOf"), U}}, {name}, 0},
        {"Professor",
         {{vocab("doctoralDegreeFrom"), U}, {vocab("worksFor"), D}},
         {name, prop("emailAddress"), prop("researchInterest")},
         6},
        {"Course", {{vocab("teacher"), P}}, {name}, 10},
    };
    t.departments_per_university = 4;
    auto c = [](ConstraintKind k, const std::string& path, const char* ref = nullptr) {
      Constraint x;
      x.kind = k;
      x.count = 1;
      x.path = Term::iri(vocab(path));
      if (ref) x.shape_ref = ShapeRef{ref, false};
      return x;
    };
    const auto MIN = ConstraintKind::kMin;
    const auto MAX = ConstraintKind::kMax;
    t.constraints = {
        {c(MIN, "name"), c(MAX, "name")},
        {c(MIN, "subOrganizationOf", "University"), c(MIN, "name"), c(MAX, "name"),
         c(MAX, "subOrganizationOf")},
        {c(MIN, "name"), c(MIN, "emailAddress"), c(MIN, "doctoralDegreeFrom", "University"),
         c(MIN, "worksFor", "Department"), c(MIN, "researchInterest"), c(MAX, "name")},
        {c(MIN, "teacher", "Professor"), c(MAX, "name")},
    };
    return t;
  }

  std::vector<std::size_t> take;
  if (size == 3) take = {4, 6, 6};
  else if (size == 7) take = {4, 5, 6, 5, 6, 5, 5};
  else if (size == 14) take.assign(14, 8);
  else throw Error("unsupported schema size " + std::to_string(size) + " (use 3, 4, 7 or 14)");

  const auto all = lubm_classes();
  t.classes.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(size));
  for (std::size_t i = 0; i < size; ++i) {
    auto cands = candidates(t.classes[i], t.classes);
    cands.resize(take[i]);
    t.constraints.push_back(std::move(cands));
  }
  // References outside the tier are never emitted.
  for (auto& cls : t.classes) {
    std::erase_if(cls.refs, [&](const RefSpec& r) { return r.target >= size; });
  }
  return t;
}

ShapeSchema tier_schema(const Tier& t) {
  std::vector<Shape> shapes;
  for (std::size_t i = 0; i < t.classes.size(); ++i) {
    Shape s;
    s.name = t.classes[i].name;
    s.target = TargetDefinition{Term::iri(vocab(t.classes[i].name)), {}};
    s.constraints = t.constraints[i];
    shapes.push_back(std::move(s));
  }
  return ShapeSchema(std::move(shapes));
}

// ---------------------------------------------------------------------------
// Entity model

struct Slot {
  std::string path;
  std::size_t target = kNone;  // class index for references
  std::vector<Term> values;
};

struct Entity {
  std::size_t cls = 0;
  std::string iri;
  std::vector<Slot> slots;  // references, then properties
};

struct Model {
  const Tier* tier = nullptr;
  std::vector<Entity> entities;
  std::map<std::string, std::size_t> by_iri;
  std::size_t dangling = 0;
  std::size_t extra = 0;
};

std::size_t slot_of(const Entity& e, const Term& path) {
  for (std::size_t i = 0; i < e.slots.size(); ++i) {
    if (e.slots[i].path == path.iri_value()) return i;
  }
  return kNone;
}

Term literal_for(const PropSpec& p, const std::string& base, std::size_t k) {
  if (!p.datatype.empty()) {
    return Term::typed_literal(std::to_string(1900 + (std::hash<std::string>{}(base) + k) % 120),
                               p.datatype);
  }
  return Term::literal(base + (k == 0 ? "" : " #" + std::to_string(k + 1)));
}

Model build_model(const Tier& tier, std::size_t scale, std::mt19937_64& rng) {
  Model m;
  m.tier = &tier;
  const auto& classes = tier.classes;

  auto entity_triples = [&](const ClassSpec& c) {
    std::size_t n = 1 + c.refs.size();
    for (const auto& p : c.props) n += p.min;
    return n;
  };
  std::size_t per_department = entity_triples(classes[1]);
  for (std::size_t k = 2; k < classes.size(); ++k) {
    per_department += classes[k].per_department * entity_triples(classes[k]);
  }
  const std::size_t per_university =
      entity_triples(classes[0]) + tier.departments_per_university * per_department;
  const std::size_t universities = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::llround(static_cast<double>(scale) /
                                                static_cast<double>(per_university))));

  auto add = [&](std::size_t cls, std::string iri) {
    Entity e;
    e.cls = cls;
    e.iri = std::move(iri);
    for (const auto& r : classes[cls].refs) e.slots.push_back({r.path, r.target, {}});
    for (std::size_t k = 0; k < classes[cls].props.size(); ++k) {
      const PropSpec& p = classes[cls].props[k];
      Slot s{p.path, kNone, {}};
      const std::string local = p.path.substr(std::string(kVocab).size());
      for (std::size_t v = 0; v < p.min; ++v) {
        s.values.push_back(literal_for(p, local + " of " + e.iri.substr(std::string(kData).size()), v));
      }
      e.slots.push_back(std::move(s));
    }
    m.by_iri.emplace(e.iri, m.entities.size());
    m.entities.push_back(std::move(e));
    return m.entities.size() - 1;
  };
  auto pick = [&](const std::vector<std::size_t>& pool) {
    std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
    return pool[d(rng)];
  };

  std::vector<std::size_t> unis;
  for (std::size_t u = 0; u < universities; ++u) {
    unis.push_back(add(0, std::string(kData) + "University" + std::to_string(u)));
  }
  for (std::size_t u = 0; u < universities; ++u) {
    for (std::size_t d = 0; d < tier.departments_per_university; ++d) {
      const std::string dprefix = m.entities[unis[u]].iri + "/Department" + std::to_string(d);
      const std::size_t dept = add(1, dprefix);
      m.entities[dept].slots[0].values.push_back(Term::iri(m.entities[unis[u]].iri));

      // Members of the department, class by class, so references can pick
      // from earlier classes; forward references are filled afterwards.
      std::vector<std::vector<std::size_t>> local(classes.size());
      local[0] = {unis[u]};
      local[1] = {dept};
      for (std::size_t k = 2; k < classes.size(); ++k) {
        for (std::size_t i = 0; i < classes[k].per_department; ++i) {
          local[k].push_back(add(k, dprefix + "/" + classes[k].name + std::to_string(i)));
        }
      }
      for (std::size_t k = 2; k < classes.size(); ++k) {
        for (std::size_t e : local[k]) {
          for (std::size_t r = 0; r < classes[k].refs.size(); ++r) {
            const std::size_t t = classes[k].refs[r].target;
            std::size_t target;
            if (t == 0) target = pick(unis);
            else if (t == 1) target = dept;
            else target = pick(local[t]);
            m.entities[e].slots[r].values.push_back(Term::iri(m.entities[target].iri));
          }
        }
      }
    }
  }
  return m;
}

bool entity_invalid(const Model& m, std::size_t i, const std::vector<bool>& invalid) {
  const Tier& tier = *m.tier;
  const Entity& e = m.entities[i];
  for (const auto& k : tier.constraints[e.cls]) {
    const std::size_t s = slot_of(e, k.path);
    std::size_t count = 0;
    if (s != kNone) {
      std::vector<Term> distinct = e.slots[s].values;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      for (const auto& v : distinct) {
        if (k.value_filter && (!v.is_literal() || v.datatype() != k.value_filter->value.iri_value())) {
          continue;
        }
        if (k.shape_ref) {
          const auto it = m.by_iri.find(v.is_iri() ? v.iri_value() : std::string());
          if (it == m.by_iri.end() || invalid[it->second] ||
              tier.classes[m.entities[it->second].cls].name != k.shape_ref->shape) {
            continue;
          }
        }
        ++count;
      }
    }
    if (k.kind == ConstraintKind::kMin ? count < k.count : count > k.count) return true;
  }
  return false;
}

// Exact verdicts of the model (references form a DAG in every tier).
std::vector<bool> model_invalid(const Model& m) {
  const Tier& tier = *m.tier;
  const std::size_t nc = tier.classes.size();
  // Topological class order: referenced classes first.
  std::vector<std::size_t> order;
  std::vector<int> state(nc, 0);
  std::function<void(std::size_t)> visit = [&](std::size_t c) {
    if (state[c]) return;
    state[c] = 1;
    for (const auto& k : tier.constraints[c]) {
      if (k.shape_ref) visit(tier_schema_index(tier, k.shape_ref->shape));
    }
    order.push_back(c);
  };
  for (std::size_t c = 0; c < nc; ++c) visit(c);

  std::vector<std::vector<std::size_t>> by_class(nc);
  for (std::size_t i = 0; i < m.entities.size(); ++i) by_class[m.entities[i].cls].push_back(i);

  std::vector<bool> invalid(m.entities.size(), false);
  for (std::size_t c : order) {
    for (std::size_t i : by_class[c]) invalid[i] = entity_invalid(m, i, invalid);
  }
  return invalid;
}

// Entities whose reference slots point at each entity. Corruption never adds
// references to existing entities, so the index stays a superset.
std::vector<std::vector<std::size_t>> referrers(const Model& m) {
  std::vector<std::vector<std::size_t>> out(m.entities.size());
  for (std::size_t i = 0; i < m.entities.size(); ++i) {
    for (const auto& slot : m.entities[i].slots) {
      if (slot.target == kNone) continue;
      for (const auto& v : slot.values) {
        const auto it = m.by_iri.find(v.iri_value());
        if (it != m.by_iri.end()) out[it->second].push_back(i);
      }
    }
  }
  return out;
}

// Re-checks `i` after a change and cascades to its referrers. Corruption only
// removes support, so verdicts move from valid to invalid. Returns the number
// of entities that became invalid.
std::size_t cascade(const Model& m, const std::vector<std::vector<std::size_t>>& refs,
                    std::vector<bool>& invalid, std::size_t i) {
  std::size_t changed = 0;
  std::vector<std::size_t> stack{i};
  while (!stack.empty()) {
    const std::size_t x = stack.back();
    stack.pop_back();
    if (invalid[x] || !entity_invalid(m, x, invalid)) continue;
    invalid[x] = true;
    ++changed;
    for (std::size_t r : refs[x]) stack.push_back(r);
  }
  return changed;
}

enum class Op { kDrop, kDuplicate, kPoint };

// Applies one corruption to entity `i`; returns the operator used, trying
// `preferred` first.
std::optional<Op> corrupt(Model& m, std::size_t i, Op preferred) {
  Entity& e = m.entities[i];
  const auto& constraints = m.tier->constraints[e.cls];
  const std::array<Op, 3> order = preferred == Op::kDrop        ? std::array{Op::kDrop, Op::kDuplicate, Op::kPoint}
                                  : preferred == Op::kDuplicate ? std::array{Op::kDuplicate, Op::kDrop, Op::kPoint}
                                                                : std::array{Op::kPoint, Op::kDrop, Op::kDuplicate};
  for (Op op : order) {
    for (const auto& k : constraints) {
      const std::size_t s = slot_of(e, k.path);
      if (s == kNone) continue;
      Slot& slot = e.slots[s];
      if (op == Op::kDrop && k.kind == ConstraintKind::kMin && !slot.values.empty()) {
        slot.values.clear();
        return op;
      }
      if (op == Op::kDuplicate && k.kind == ConstraintKind::kMax && !k.shape_ref) {
        std::size_t n = 0;
        while (slot.values.size() <= k.count) {
          if (slot.target != kNone) {
            slot.values.push_back(Term::iri(std::string(kData) + "extra/" + std::to_string(m.extra++)));
          } else {
            const Term& first = slot.values.empty() ? Term::literal("value") : slot.values.front();
            if (first.is_literal() && first.datatype() == kXsdInteger) {
              slot.values.push_back(Term::typed_literal(std::to_string(3000 + n++), kXsdInteger));
            } else {
              slot.values.push_back(Term::literal(first.lexical() + " (duplicate " + std::to_string(++n) + ")"));
            }
          }
        }
        return op;
      }
      if (op == Op::kPoint && k.kind == ConstraintKind::kMin && k.shape_ref) {
        slot.values = {Term::iri(std::string(kData) + "dangling/" + std::to_string(m.dangling++))};
        return op;
      }
    }
  }
  return std::nullopt;
}

Graph to_graph(const Model& m) {
  Graph g;
  const Term type = Term::iri(kRdfType);
  for (const auto& e : m.entities) {
    const Term s = Term::iri(e.iri);
    g.add(s, type, Term::iri(vocab(m.tier->classes[e.cls].name)));
    for (const auto& slot : e.slots) {
      const Term p = Term::iri(slot.path);
      for (const auto& v : slot.values) g.add(s, p, v);
    }
  }
  return g;
}

std::string to_ntriples(const Model& m) {
  std::string out;
  const std::string type = "<" + std::string(kRdfType) + ">";
  for (const auto& e : m.entities) {
    const std::string s = "<" + e.iri + "> ";
    out += s + type + " <" + vocab(m.tier->classes[e.cls].name) + "> .\n";
    for (const auto& slot : e.slots) {
      for (const auto& v : slot.values) out += s + "<" + slot.path + "> " + v.str() + " .\n";
    }
  }
  return out;
}

std::string pct_text(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", pct);
  return buf;
}

}  // namespace

std::string BenchSpec::label() const {
  return "S" + std::to_string(schema_size) + "-" + std::to_string(scale) + "-" +
         pct_text(invalid_pct) + "pct";
}

ShapeSchema bench_schema(std::size_t schema_size) { return tier_schema(make_tier(schema_size)); }

Testbed generate_benchmark(const BenchSpec& spec) {
  if (spec.invalid_pct < 0 || spec.invalid_pct > 100) {
    throw Error("invalid_pct must lie in [0, 100]");
  }
  const Tier tier = make_tier(spec.schema_size);
  const ShapeSchema schema = tier_schema(tier);
  std::mt19937_64 rng(spec.seed);
  Model model = build_model(tier, spec.scale, rng);
  const double target = spec.invalid_pct / 100.0;
  if (target > 0 && model.entities.empty()) throw Error("no corruptible entities");

  std::map<std::string, std::size_t> ops{{"drop", 0}, {"duplicate", 0}, {"point", 0}};
  auto count_op = [&](Op op) {
    ops[op == Op::kDrop ? "drop" : op == Op::kDuplicate ? "duplicate" : "point"]++;
  };

  // Phase 1: corrupt universities and departments while the cascade stays at
  // or below the target.
  std::vector<bool> invalid = model_invalid(model);
  const auto refs = referrers(model);
  const double total = static_cast<double>(model.entities.size());
  std::size_t invalid_count = static_cast<std::size_t>(std::count(invalid.begin(), invalid.end(), true));
  auto share = [&](std::size_t n) { return total > 0 ? static_cast<double>(n) / total : 0.0; };
  {
    std::vector<std::size_t> upstream;
    for (std::size_t cls : {std::size_t{0}, std::size_t{1}}) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < model.entities.size(); ++i) {
        if (model.entities[i].cls == cls) pool.push_back(i);
      }
      std::shuffle(pool.begin(), pool.end(), rng);
      upstream.insert(upstream.end(), pool.begin(), pool.end());
    }
    std::size_t k = 0;
    for (std::size_t i : upstream) {
      if (share(invalid_count) >= target - 0.005) break;
      if (invalid[i]) continue;
      const Entity saved = model.entities[i];
      const std::size_t saved_extra = model.extra;
      const auto op = corrupt(model, i, k % 2 == 0 ? Op::kDrop : Op::kDuplicate);
      if (!op) continue;
      auto trial = invalid;
      const std::size_t added = cascade(model, refs, trial, i);
      if (share(invalid_count + added) <= target) {
        invalid = std::move(trial);
        invalid_count += added;
        count_op(*op);
        ++k;
      } else {
        model.entities[i] = saved;
        model.extra = saved_extra;
      }
    }
  }

  // Phase 2: corrupt a prefix of the remaining valid entities, leaves first;
  // the prefix length closest to the target wins.
  if (share(invalid_count) < target) {
    std::vector<bool> referenced(tier.classes.size(), false);
    for (const auto& cs : tier.constraints) {
      for (const auto& c : cs) {
        if (c.shape_ref) referenced[tier_schema_index(tier, c.shape_ref->shape)] = true;
      }
    }
    std::vector<std::size_t> leaves, inner;
    for (std::size_t i = 0; i < model.entities.size(); ++i) {
      if (invalid[i]) continue;
      (referenced[model.entities[i].cls] ? inner : leaves).push_back(i);
    }
    std::shuffle(leaves.begin(), leaves.end(), rng);
    std::shuffle(inner.begin(), inner.end(), rng);
    std::vector<std::size_t> pool = leaves;
    pool.insert(pool.end(), inner.begin(), inner.end());

    // Dry run on a copy: the invalid count after each prefix length.
    std::size_t best = 0;
    {
      Model trial = model;
      auto trial_invalid = invalid;
      std::size_t n = invalid_count;
      double best_gap = target - share(n);
      for (std::size_t j = 0; j < pool.size() && share(n) < target; ++j) {
        if (corrupt(trial, pool[j], static_cast<Op>(j % 3))) {
          n += cascade(trial, refs, trial_invalid, pool[j]);
        }
        const double gap = std::abs(share(n) - target);
        if (gap < best_gap) {
          best_gap = gap;
          best = j + 1;
        }
      }
    }
    for (std::size_t j = 0; j < best; ++j) {
      if (const auto op = corrupt(model, pool[j], static_cast<Op>(j % 3))) count_op(*op);
    }
  }

  Testbed tb;
  tb.spec = spec;
  tb.schema_json = serialize_schema(schema);
  tb.ntriples = to_ntriples(model);
  const Graph graph = to_graph(model);
  tb.triples = graph.triple_count();
  tb.truth = reference_verdicts(schema, graph);
  tb.targeted = tb.truth.size();
  tb.invalid = static_cast<std::size_t>(
      std::count_if(tb.truth.begin(), tb.truth.end(),
                    [](const VerdictRecord& v) { return v.verdict == Verdict::kFalse; }));
  tb.invalid_fraction =
      tb.targeted ? static_cast<double>(tb.invalid) / static_cast<double>(tb.targeted) : 0;

  // Analogue of the per-constraint check averages: neighbour pairs per
  // inter-shape constraint and targets per intra-shape constraint.
  std::size_t inter = 0, intra = 0, inter_checks = 0, intra_checks = 0;
  for (std::size_t c = 0; c < tier.classes.size(); ++c) {
    std::size_t members = 0, pairs = 0;
    for (const auto& e : model.entities) {
      if (e.cls != c) continue;
      ++members;
      for (const auto& k : tier.constraints[c]) {
        if (!k.shape_ref) continue;
        const std::size_t s = slot_of(e, k.path);
        if (s != kNone) pairs += e.slots[s].values.size();
      }
    }
    for (const auto& k : tier.constraints[c]) {
      if (k.shape_ref) ++inter;
      else {
        ++intra;
        intra_checks += members;
      }
    }
    inter_checks += pairs;
  }

  json manifest;
  manifest["schema_size"] = spec.schema_size;
  manifest["scale"] = spec.scale;
  manifest["invalid_pct"] = spec.invalid_pct;
  manifest["seed"] = spec.seed;
  manifest["triples"] = tb.triples;
  manifest["subjects"] = graph.subject_count();
  manifest["constraints"] = schema.constraint_count();
  manifest["targeted"] = tb.targeted;
  manifest["invalid"] = tb.invalid;
  manifest["invalid_fraction"] = tb.invalid_fraction;
  manifest["avg_inter_checks"] = inter ? static_cast<double>(inter_checks) / inter : 0.0;
  manifest["avg_intra_checks"] = intra ? static_cast<double>(intra_checks) / intra : 0.0;
  manifest["corruptions"] = ops;
  json verdicts = json::array();
  for (const auto& v : tb.truth) {
    verdicts.push_back({{"entity", v.entity.str()}, {"shape", v.shape}, {"verdict", to_string(v.verdict)}});
  }
  manifest["verdicts"] = std::move(verdicts);
  tb.manifest_json = manifest.dump(2) + "\n";
  return tb;
}

void write_testbed(const Testbed& testbed, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << text;
  };
  write(kSchemaFile, testbed.schema_json);
  write(kDataFile, testbed.ntriples);
  write(kManifestFile, testbed.manifest_json);
}

std::vector<VerdictRecord> read_manifest_truth(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot read " + file.string());
  std::vector<VerdictRecord> out;
  try {
    const json doc = json::parse(in);
    for (const auto& v : doc.at("verdicts")) {
      out.push_back({Term::from_canonical(v.at("entity").get<std::string>()),
                     v.at("shape").get<std::string>(),
                     parse_verdict(v.at("verdict").get<std::string>())});
    }
  } catch (const json::exception& e) {
    throw SyntaxError(file.string() + ": " + e.what(), 0);
  }
  return out;
}

std::vector<double> tier_invalid_percentages(std::size_t schema_size) {
  switch (schema_size) {
    case 3: return {75.83, 87.42, 92.22};
    case 7: return {1.38, 1.59, 1.68};
    case 14: return {7.61, 11.52, 15.10};
    case 4: return {20, 50, 85};
    default: throw Error("unsupported schema size " + std::to_string(schema_size));
  }
}

std::vector<BenchSpec> default_matrix(std::uint64_t seed, std::vector<std::size_t> scales) {
  std::vector<BenchSpec> out;
  for (std::size_t tier : {3, 7, 14}) {
    for (std::size_t scale : scales) {
      for (double pct : tier_invalid_percentages(tier)) out.push_back({tier, scale, pct, seed});
    }
  }
  return out;
}

std::vector<NamedConfig> matrix_configurations(std::uint64_t rng_seed) {
  std::vector<NamedConfig> out;
  for (const auto& p : standard_configurations(rng_seed)) {
    ValidationConfig c;
    c.planner = p;
    out.push_back({describe(p), c});
  }
  ValidationConfig base;
  base.rewriting = false;
  out.push_back({"baseline", base});
  return out;
}

std::vector<MatrixRow> run_matrix(const std::vector<Testbed>& testbeds,
                                  const std::vector<NamedConfig>& configs,
                                  const MatrixOptions& options) {
  struct Loaded {
    ShapeSchema schema;
    std::shared_ptr<const Graph> graph;
  };
  std::vector<Loaded> loaded;
  for (const auto& tb : testbeds) {
    loaded.push_back({parse_schema(tb.schema_json),
                      std::make_shared<const Graph>(load_ntriples_text(tb.ntriples))});
  }

  const std::size_t cells = testbeds.size() * configs.size();
  std::vector<MatrixRow> rows(cells);
  std::mutex progress_mu;
  auto run_cell = [&](std::size_t cell) {
    const std::size_t t = cell / configs.size();
    const std::size_t c = cell % configs.size();
    MatrixRow& row = rows[cell];
    row.testbed = testbeds[t].spec.label();
    row.config = configs[c].label;
    std::vector<double> times, diefs, tfffs;
    ValidationResult last;
    try {
      EmbeddedSource source(loaded[t].graph, options.max_answers);
      for (std::size_t r = 0; r < std::max<std::size_t>(1, options.repetitions); ++r) {
        source.flush_caches();
        last = run_validation(loaded[t].schema, source, configs[c].config);
        if (last.partial) throw Error(last.error);
        const MetricSet m = summarize(last.trace);
        times.push_back(m.validation_time);
        diefs.push_back(m.dief_t);
        tfffs.push_back(m.tfff);
        row.comp = m.comp;
        row.rules_grounded = last.rules_grounded;
        ++row.runs;
      }
      row.matches_truth = last.verdicts == testbeds[t].truth;
      if (options.keep_verdicts) row.verdicts = last.verdicts;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.validation_time = mean_std(times);
    row.dief_t = mean_std(diefs);
    row.tfff = mean_std(tfffs);
    std::lock_guard lock(progress_mu);
    if (options.on_cell && row.error.empty()) options.on_cell(row, last);
    if (options.on_progress) {
      options.on_progress(row.testbed + " / " + row.config +
                          (row.error.empty() ? "" : " failed: " + row.error));
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.parallel_cells, cells));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells; ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells; i = next++) run_cell(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::string format_matrix(const std::vector<MatrixRow>& rows) {
  std::ostringstream out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-22s %-24s %4s %12s %10s %10s %8s %14s %10s %s\n", "testbed",
                "config", "runs", "time_mean_s", "time_sd_s", "tfff_s", "comp", "dief_t",
                "rules", "truth");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-22s %-24s %4zu %12.6f %10.6f %10.6f %8zu %14.6f %10zu %s\n",
                  r.testbed.c_str(), r.config.c_str(), r.runs, r.validation_time.mean,
                  r.validation_time.stddev, r.tfff.mean, r.comp, r.dief_t.mean, r.rules_grounded,
                  !r.error.empty() ? ("error: " + r.error).c_str()
                  : r.matches_truth ? "match"
                                    : "MISMATCH");
    out << buf;
  }
  return out.str();
}

}  // namespace travshacl
