#include <gtest/gtest.h>

#include <travshacl/errors.hpp>
#include <travshacl/query_builder.hpp>
#include <travshacl/source.hpp>
#include <travshacl/validation.hpp>

#include <algorithm>
#include <memory>

using namespace travshacl;

namespace {

Term ex(const std::string& local) { return Term::iri("http://ex/" + local); }

Constraint min_on(const std::string& path, std::size_t n = 1, const char* shape = nullptr) {
  Constraint c;
  c.count = n;
  c.path = ex(path);
  if (shape) c.shape_ref = ShapeRef{shape, false};
  return c;
}

Shape make(const std::string& name, std::vector<Constraint> cs) {
  Shape s;
  s.name = name;
  s.target = TargetDefinition{ex(name), {}};
  s.constraints = std::move(cs);
  return s;
}

ResultSet rows(std::vector<Variable> vars, std::vector<std::vector<Term>> data) {
  ResultSet r;
  r.variables = std::move(vars);
  r.rows = std::move(data);
  return r;
}

ResultSet targets(std::vector<Term> entities) {
  std::vector<std::vector<Term>> data;
  for (auto& e : entities) data.push_back({e});
  return rows({Variable{"x"}}, std::move(data));
}

// Min-query answers of `shape`: one row per (entity, neighbour...) tuple in
// the query's projection order.
ResultSet min_rows(const Shape& shape, std::vector<std::vector<Term>> data) {
  return rows(gen_min_query(shape).query.projected, std::move(data));
}

ValidationResult run(const ShapeSchema& schema, const std::string& nt, bool rewriting = true) {
  auto g = std::make_shared<const Graph>(load_ntriples_text(nt));
  EmbeddedSource src(g);
  ValidationConfig cfg;
  cfg.rewriting = rewriting;
  return run_validation(schema, src, cfg);
}

}  // namespace

TEST(Assignment, TransitionsOnceAndNeverFlips) {
  Assignment a(2);
  const AtomId x = a.intern(0, ex("a"));
  EXPECT_EQ(a.intern(0, ex("a")), x);
  EXPECT_NE(a.intern(1, ex("a")), x);
  EXPECT_TRUE(a.set(x, Verdict::kTrue));
  EXPECT_FALSE(a.set(x, Verdict::kTrue));
  EXPECT_THROW(a.set(x, Verdict::kFalse), std::logic_error);
  EXPECT_EQ(a.transitions(), std::vector<AtomId>{x});

  const AtomId y = a.intern(1, ex("b"));
  a.finalize(1);
  EXPECT_THROW(a.set(y, Verdict::kFalse), std::logic_error);
}

TEST(Grounder, MissingFromMinRowsIsFalse) {
  const ShapeSchema s({make("A", {min_on("name")})});
  Grounder g(s);
  g.ground_shape(0, targets({ex("a"), ex("b")}), min_rows(s.shapes()[0], {{ex("b")}}), {});
  g.saturate();
  EXPECT_EQ(g.assignment().verdict(0, ex("a")), Verdict::kFalse);
  EXPECT_EQ(g.assignment().verdict(0, ex("b")), Verdict::kTrue);
}

TEST(Grounder, FalseNeighbourDecidesImmediately) {
  const ShapeSchema s({make("U", {min_on("name")}), make("D", {min_on("sub", 1, "U")})});
  Grounder g(s);
  g.ground_shape(0, targets({ex("u")}), min_rows(s.shapes()[0], {}), {});
  g.saturate();
  ASSERT_EQ(g.assignment().verdict(0, ex("u")), Verdict::kFalse);
  g.ground_shape(1, targets({ex("d")}), min_rows(s.shapes()[1], {{ex("d"), ex("u")}}), {});
  EXPECT_EQ(g.assignment().verdict(1, ex("d")), Verdict::kFalse);
  const auto states = g.states_of(*g.assignment().find(1, ex("d")));
  EXPECT_EQ(g.state(states[0]).satisfied, 0u);
  EXPECT_EQ(g.state(states[0]).pending, 0u);
}

TEST(Grounder, ViolatorRowDecidesMaxFalse) {
  Constraint mx = min_on("name");
  mx.kind = ConstraintKind::kMax;
  const ShapeSchema s({make("A", {mx})});
  Grounder g(s);
  g.ground_shape(0, targets({ex("a"), ex("b")}), {}, {{0, targets({ex("a")})}});
  EXPECT_EQ(g.assignment().verdict(0, ex("a")), Verdict::kFalse);
  EXPECT_EQ(g.assignment().verdict(0, ex("b")), Verdict::kTrue);
  EXPECT_EQ(g.ledger().intra_checks, 2u);
}

TEST(Saturate, ChainBecomesTrueInOnePass) {
  const ShapeSchema s({make("s1", {min_on("q")}), make("s2", {min_on("p", 1, "s1")}),
                       make("s3", {min_on("p", 1, "s2")})});
  Grounder g(s);
  g.ground_shape(2, targets({ex("c")}), min_rows(s.shapes()[2], {{ex("c"), ex("b")}}), {});
  g.ground_shape(1, targets({ex("b")}), min_rows(s.shapes()[1], {{ex("b"), ex("a")}}), {});
  EXPECT_EQ(g.assignment().verdict(2, ex("c")), Verdict::kUnknown);
  g.ground_shape(0, targets({ex("a")}), min_rows(s.shapes()[0], {{ex("a")}}), {});
  EXPECT_EQ(g.saturate(), 2u);
  EXPECT_EQ(g.assignment().verdict(1, ex("b")), Verdict::kTrue);
  EXPECT_EQ(g.assignment().verdict(2, ex("c")), Verdict::kTrue);
  EXPECT_EQ(g.saturate(), 0u);  // fixed point
}

TEST(Saturate, UnsupportedPositiveCycleClosesFalse) {
  const ShapeSchema s({make("s1", {min_on("p", 1, "s2")}), make("s2", {min_on("p", 1, "s1")})});
  Grounder g(s);
  g.ground_shape(0, targets({ex("a")}), min_rows(s.shapes()[0], {{ex("a"), ex("b")}}), {});
  g.ground_shape(1, targets({ex("b")}), min_rows(s.shapes()[1], {{ex("b"), ex("a")}}), {});
  g.saturate();
  EXPECT_EQ(g.assignment().verdict(0, ex("a")), Verdict::kUnknown);
  g.close_unknown({0, 1});
  EXPECT_EQ(g.assignment().verdict(0, ex("a")), Verdict::kFalse);
  EXPECT_EQ(g.assignment().verdict(1, ex("b")), Verdict::kFalse);
}

TEST(EarlyInvalidate, CascadesToThreeProfessors) {
  const ShapeSchema s({make("U", {min_on("name")}), make("P", {min_on("degreeFrom", 1, "U")})});
  Grounder g(s);
  g.ground_shape(1, targets({ex("p1"), ex("p2"), ex("p3")}),
                 min_rows(s.shapes()[1], {{ex("p1"), ex("u")}, {ex("p2"), ex("u")}, {ex("p3"), ex("u")}}),
                 {});
  const AtomId u = *g.assignment().find(0, ex("u"));
  EXPECT_EQ(g.early_invalidate(u), 3u);
  for (const char* p : {"p1", "p2", "p3"}) EXPECT_EQ(g.assignment().verdict(1, ex(p)), Verdict::kFalse);
}

TEST(EarlyInvalidate, UnreferencedEntitySkipsNothing) {
  const ShapeSchema s({make("U", {min_on("name")})});
  Grounder g(s);
  EXPECT_EQ(g.early_invalidate(g.atom(0, ex("lonely"))), 0u);
}

TEST(EarlyInvalidate, SatisfiedMinTwoStaysTrue) {
  const ShapeSchema s({make("U", {min_on("name")}), make("P", {min_on("degreeFrom", 2, "U")})});
  Grounder g(s);
  g.ground_shape(0, targets({ex("u1"), ex("u2")}), min_rows(s.shapes()[0], {{ex("u1")}, {ex("u2")}}), {});
  g.saturate();
  g.ground_shape(1, targets({ex("p")}),
                 min_rows(s.shapes()[1], {{ex("p"), ex("u1")}, {ex("p"), ex("u2")}, {ex("p"), ex("u3")}}),
                 {});
  ASSERT_EQ(g.assignment().verdict(1, ex("p")), Verdict::kTrue);
  const std::size_t before = g.assignment().transitions().size();
  EXPECT_EQ(g.early_invalidate(*g.assignment().find(0, ex("u3"))), 1u);
  EXPECT_EQ(g.assignment().verdict(1, ex("p")), Verdict::kTrue);
  // Only u3 itself changed.
  EXPECT_EQ(g.assignment().transitions().size(), before + 1);
}

TEST(RunValidation, EmptySchema) {
  const ValidationResult r = run(ShapeSchema{}, "<http://ex/a> <http://ex/p> <http://ex/b> .\n");
  EXPECT_TRUE(r.verdicts.empty());
  EXPECT_TRUE(r.trace.entries.empty());
}

TEST(RunValidation, UniversityFixture) {
  const ShapeSchema s = load_schema_file(TRAVSHACL_FIXTURES "/university.json");
  auto g = std::make_shared<const Graph>(load_ntriples_file(TRAVSHACL_FIXTURES "/university_small.nt"));
  std::vector<std::string> events;
  ValidationConfig cfg;
  cfg.on_event = [&](const std::string& e) { events.push_back(e); };
  EmbeddedSource src(g);
  const ValidationResult on = run_validation(s, src, cfg);
  cfg.rewriting = false;
  cfg.on_event = nullptr;
  EmbeddedSource src2(g);
  const ValidationResult off = run_validation(s, src2, cfg);

  EXPECT_EQ(on.verdicts, reference_verdicts(s, *g));
  EXPECT_EQ(on.verdicts, off.verdicts);
  std::vector<std::string> valid;
  for (const auto& v : on.verdicts) {
    if (v.verdict == Verdict::kTrue) valid.push_back(v.entity.iri_value());
  }
  EXPECT_EQ(valid, (std::vector<std::string>{"http://example.org/ub#u1", "http://example.org/ub#d1",
                                             "http://example.org/ub#p1", "http://example.org/ub#c1"}));
  EXPECT_EQ(on.verdicts.size(), 9u);
  EXPECT_LT(on.rules_grounded, off.rules_grounded);
  EXPECT_EQ(on.plan.order, (std::vector<std::string>{"University", "Department", "Professor", "Course"}));
  EXPECT_EQ(std::count_if(events.begin(), events.end(),
                          [](const std::string& e) { return e.find("finalized") != std::string::npos; }),
            4);
  EXPECT_EQ(on.trace.entries.size(), on.verdicts.size());
  EXPECT_LE(on.trace.entries.front().elapsed_seconds, on.trace.run_seconds);
}

TEST(RunValidation, AllValidGraphGroundsTheSameRulesEitherWay) {
  const ShapeSchema s({make("U", {min_on("name")}), make("D", {min_on("sub", 1, "U"), min_on("name")})});
  std::string nt;
  for (int u = 0; u < 3; ++u) {
    const std::string U = "<http://ex/u" + std::to_string(u) + ">";
    nt += U + " <" + std::string(kRdfType) + "> <http://ex/U> .\n" + U + " <http://ex/name> \"n\" .\n";
    for (int d = 0; d < 4; ++d) {
      const std::string D = "<http://ex/d" + std::to_string(u) + "_" + std::to_string(d) + ">";
      nt += D + " <" + std::string(kRdfType) + "> <http://ex/D> .\n" + D + " <http://ex/sub> " + U + " .\n" +
            D + " <http://ex/name> \"n\" .\n";
    }
  }
  const ValidationResult on = run(s, nt, true);
  const ValidationResult off = run(s, nt, false);
  EXPECT_EQ(std::count_if(on.verdicts.begin(), on.verdicts.end(),
                          [](const VerdictRecord& v) { return v.verdict == Verdict::kFalse; }),
            0);
  EXPECT_EQ(on.verdicts.size(), 15u);
  EXPECT_EQ(on.rules_grounded, off.rules_grounded);
}

TEST(RunValidation, NegativeCycleIsRejected) {
  Constraint neg = min_on("p", 1, "B");
  neg.shape_ref->negated = true;
  const ShapeSchema s({make("A", {neg}), make("B", {min_on("p", 1, "A")})});
  EXPECT_THROW(run(s, ""), NegativeCycleError);
}

namespace {

class FailingSource final : public GraphSource {
 public:
  FailingSource(std::shared_ptr<const Graph> g, int fail_at) : inner_(std::move(g)), fail_at_(fail_at) {}
  std::size_t max_answers() const override { return inner_.max_answers(); }
  std::string describe() const override { return "failing"; }

 protected:
  ResultSet do_evaluate(const SelectQuery& q) override {
    if (++calls_ >= fail_at_) throw TransportError("endpoint went away", 503);
    return inner_.evaluate(q);
  }

 private:
  EmbeddedSource inner_;
  int fail_at_;
  int calls_ = 0;
};

}  // namespace

TEST(RunValidation, TransportFailureKeepsAPartialResult) {
  const ShapeSchema s = load_schema_file(TRAVSHACL_FIXTURES "/university.json");
  auto g = std::make_shared<const Graph>(load_ntriples_file(TRAVSHACL_FIXTURES "/university_small.nt"));
  const auto truth = reference_verdicts(s, *g);
  FailingSource src(g, 6);
  const ValidationResult r = run_validation(s, src);
  EXPECT_TRUE(r.partial);
  EXPECT_NE(r.error.find("endpoint went away"), std::string::npos);
  EXPECT_LT(r.trace.entries.size(), truth.size());
  for (const auto& v : r.verdicts) {
    if (v.verdict == Verdict::kUnknown) continue;
    EXPECT_NE(std::find(truth.begin(), truth.end(), v), truth.end()) << v.entity.str();
  }
}

TEST(RunValidation, UntargetedShapesAreValidatedThroughReferences) {
  Shape inner = make("Inner", {min_on("name")});
  inner.target.reset();
  const ShapeSchema s({make("Outer", {min_on("link", 1, "Inner")}), inner});
  const std::string type = " <" + std::string(kRdfType) + "> <http://ex/Outer> .\n";
  const std::string nt = "<http://ex/o1>" + type + "<http://ex/o2>" + type +
                         "<http://ex/o1> <http://ex/link> <http://ex/i1> .\n"
                         "<http://ex/o2> <http://ex/link> <http://ex/i2> .\n"
                         "<http://ex/i1> <http://ex/name> \"x\" .\n";
  for (bool rewriting : {true, false}) {
    const ValidationResult r = run(s, nt, rewriting);
    ASSERT_EQ(r.verdicts.size(), 2u);  // only targeted atoms are reported
    EXPECT_EQ(r.verdicts[0].verdict, Verdict::kTrue);
    EXPECT_EQ(r.verdicts[1].verdict, Verdict::kFalse);
  }
}
