#include <gtest/gtest.h>

#include <travshacl/errors.hpp>
#include <travshacl/graph.hpp>
#include <travshacl/query.hpp>
#include <travshacl/query_builder.hpp>
#include <travshacl/schema.hpp>

#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace travshacl;

namespace {

ShapeSchema university() { return load_schema_file(TRAVSHACL_FIXTURES "/university.json"); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Term e(int i) { return Term::iri("http://e/x" + std::to_string(10000 + i)); }
Term p(const std::string& name) { return Term::iri("http://p/" + name); }

Shape single(ConstraintKind kind, std::size_t count, const std::string& path) {
  Shape s;
  s.name = "S";
  s.target = TargetDefinition{Term::iri("http://c/C"), {}};
  Constraint c;
  c.kind = kind;
  c.count = count;
  c.path = p(path);
  s.constraints = {c};
  return s;
}

// Random store: subjects typed http://c/C with a few values on two paths.
Graph random_store(std::uint64_t seed, std::size_t subjects) {
  std::mt19937_64 rng(seed);
  Graph g;
  for (std::size_t i = 0; i < subjects; ++i) {
    g.add(e(static_cast<int>(i)), Term::iri(kRdfType), Term::iri("http://c/C"));
    for (const char* path : {"a", "b"}) {
      const std::size_t k = rng() % 4;
      for (std::size_t j = 0; j < k; ++j) {
        g.add(e(static_cast<int>(i)), p(path), Term::literal("v" + std::to_string(rng() % 3)));
      }
    }
  }
  return g;
}

std::map<Term, std::size_t> distinct_values(const Graph& g, const Term& path) {
  std::map<Term, std::size_t> out;
  std::map<Term, std::set<Term>> vals;
  for (const auto& t : g.triples()) {
    if (g.term(t.p) == path) vals[g.term(t.s)].insert(g.term(t.o));
  }
  for (const auto& [s, v] : vals) out[s] = v.size();
  return out;
}

std::set<Term> subjects(const ResultSet& r) {
  std::set<Term> out;
  for (const auto& row : r.rows) out.insert(row[r.column(Variable{"x"})]);
  return out;
}

}  // namespace

TEST(TargetQuery, ClassTargetMatchesGolden) {
  const ShapeSchema s = university();
  const ShapeQuery q = gen_target_query(s.at("Professor"));
  ASSERT_EQ(q.query.patterns.size(), 1u);
  EXPECT_EQ(q.query.patterns[0].predicate, Term::iri(kRdfType));
  EXPECT_EQ(serialize(q.query), read_file(TRAVSHACL_FIXTURES "/golden/professor_target.rq"));
  EXPECT_EQ(serialize(q.query), serialize(gen_target_query(s.at("Professor")).query));
}

TEST(TargetQuery, ExplicitQueryGetsOrderBy) {
  const ShapeSchema s = parse_schema(R"({"shapes":[{"name":"A",
      "targetQuery":"SELECT ?x WHERE { ?x <http://p/a> ?y . }",
      "constraints":[{"kind":"min","count":1,"path":"http://p/b"}]}]})");
  const std::string text = serialize(gen_target_query(s.at("A")).query);
  EXPECT_NE(text.find("?x <http://p/a> ?"), std::string::npos);
  EXPECT_NE(text.find("ORDER BY ?x"), std::string::npos);
}

TEST(TargetQuery, UntargetedShapeThrows) {
  Shape s = single(ConstraintKind::kMin, 1, "a");
  s.target.reset();
  EXPECT_THROW(gen_target_query(s), QueryError);
}

TEST(MinQuery, ProfessorJoinsFivePathGroupsInOneQuery) {
  const ShapeQuery q = gen_min_query(university().at("Professor"));
  std::set<std::string> paths;
  for (const auto& tp : q.query.patterns) {
    if (tp.predicate != Term::iri(kRdfType)) paths.insert(tp.predicate.iri_value());
  }
  EXPECT_EQ(paths.size(), 5u);
  EXPECT_EQ(q.neighbor_vars.size(), 2u);  // degree and employer are co-projected
}

TEST(MinQuery, MinOneIsASinglePattern) {
  const ShapeQuery q = gen_min_query(single(ConstraintKind::kMin, 1, "a"));
  std::size_t value_patterns = 0;
  for (const auto& tp : q.query.patterns) value_patterns += tp.predicate == p("a");
  EXPECT_EQ(value_patterns, 1u);
  EXPECT_TRUE(q.query.inequalities.empty());
}

TEST(MinQuery, MinTwoReturnsExactlyEntitiesWithTwoDistinctValues) {
  const ShapeQuery q = gen_min_query(single(ConstraintKind::kMin, 2, "a"));
  EXPECT_EQ(q.query.inequalities.size(), 1u);
  // Ten-triple store.
  Graph g;
  for (int i = 0; i < 4; ++i) g.add(e(i), Term::iri(kRdfType), Term::iri("http://c/C"));
  g.add(e(0), p("a"), Term::literal("1"));
  g.add(e(1), p("a"), Term::literal("1"));
  g.add(e(1), p("a"), Term::literal("2"));
  g.add(e(2), p("a"), Term::literal("1"));
  g.add(e(2), p("a"), Term::literal("2"));
  g.add(e(2), p("a"), Term::literal("3"));
  ASSERT_EQ(g.triple_count(), 10u);
  EXPECT_EQ(subjects(evaluate_unbounded(g, q.query)), (std::set<Term>{e(1), e(2)}));
}

TEST(MinQuery, NoMinConstraintThrows) {
  EXPECT_THROW(gen_min_query(single(ConstraintKind::kMax, 1, "a")), QueryError);
}

TEST(MaxQueries, OnePerConstraint) {
  const ShapeSchema s = university();
  EXPECT_EQ(gen_max_queries(s.at("Department")).size(), 2u);
  EXPECT_TRUE(gen_max_queries(single(ConstraintKind::kMin, 1, "a")).empty());
  const auto q = gen_max_queries(single(ConstraintKind::kMax, 1, "name"));
  ASSERT_EQ(q.size(), 1u);
  EXPECT_EQ(q[0].query.inequalities.size(), 1u);
  EXPECT_NE(serialize(q[0].query).find("FILTER(?p0 != ?p1)"), std::string::npos);
}

TEST(MaxQueries, ViolatorsHaveMoreThanNValues) {
  for (std::size_t n = 0; n <= 3; ++n) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Graph g = random_store(seed, 40);
      const auto q = gen_max_queries(single(ConstraintKind::kMax, n, "a"));
      std::set<Term> expected;
      for (const auto& [s, k] : distinct_values(g, p("a"))) {
        if (k > n) expected.insert(s);
      }
      EXPECT_EQ(subjects(evaluate_unbounded(g, q.at(0).query)), expected) << n << "/" << seed;
    }
  }
}

TEST(MinQueries, MatchEntitiesWithAtLeastNValues) {
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Graph g = random_store(seed, 40);
      const auto q = gen_min_query(single(ConstraintKind::kMin, n, "b"));
      std::set<Term> expected;
      for (const auto& [s, k] : distinct_values(g, p("b"))) {
        if (k >= n) expected.insert(s);
      }
      EXPECT_EQ(subjects(evaluate_unbounded(g, q.query)), expected) << n << "/" << seed;
    }
  }
}

TEST(PushFilter, SmallestListWins) {
  const SelectQuery base = gen_target_query(single(ConstraintKind::kMin, 1, "a")).query;
  const Variable x{"x"};
  std::vector<Term> valid, invalid;
  for (int i = 0; i < 8; ++i) valid.push_back(e(i));
  for (int i = 8; i < 1268; ++i) invalid.push_back(e(i));
  const SelectQuery inc = push_instance_filter(base, valid, invalid, x, "University");
  ASSERT_NE(inc.filter_on(x), nullptr);
  EXPECT_EQ(inc.filter_on(x)->mode, FilterMode::kInclude);
  EXPECT_EQ(inc.filter_on(x)->entities.size(), 8u);
  EXPECT_EQ(inc.filter_on(x)->source_shape, "University");

  EXPECT_EQ(push_instance_filter(base, {}, {}, x), base);

  std::vector<Term> hundred(valid.begin(), valid.end());
  for (int i = 100; i < 192; ++i) hundred.push_back(e(i));
  const std::vector<Term> three{e(500), e(501), e(502)};
  const SelectQuery exc = push_instance_filter(base, hundred, three, x);
  EXPECT_EQ(exc.filter_on(x)->mode, FilterMode::kExclude);
  EXPECT_EQ(exc.filter_on(x)->entities, three);

  const SelectQuery other = push_instance_filter(base, {}, three, x);
  EXPECT_EQ(other.filter_on(x)->mode, FilterMode::kExclude);
}

TEST(PushFilter, FilteredAnswersAreTheRestrictedOriginal) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph g = random_store(seed, 60);
    const SelectQuery q = gen_min_query(single(ConstraintKind::kMin, 1, "a")).query;
    const std::set<Term> all = subjects(evaluate_unbounded(g, q));
    std::mt19937_64 rng(seed);
    std::vector<Term> valid, invalid;
    for (int i = 0; i < 60; ++i) {
      if (rng() % 3 == 0) valid.push_back(e(i));
      else if (rng() % 2 == 0) invalid.push_back(e(i));
    }
    const SelectQuery f = push_instance_filter(q, valid, invalid, Variable{"x"});
    std::set<Term> expected;
    for (const Term& t : all) {
      const bool in_valid = std::find(valid.begin(), valid.end(), t) != valid.end();
      const bool in_invalid = std::find(invalid.begin(), invalid.end(), t) != invalid.end();
      if (f.filter_on(Variable{"x"})->mode == FilterMode::kInclude ? in_valid : !in_invalid) {
        expected.insert(t);
      }
    }
    EXPECT_EQ(subjects(evaluate_unbounded(g, f)), expected) << seed;
  }
}

namespace {

// 10,000 same-length entities; the length budget leaves room for `per_part`
// of them in one include filter.
struct ChunkSetup {
  SelectQuery query;
  std::size_t budget;
};

ChunkSetup chunk_setup(std::size_t per_part) {
  const SelectQuery base = gen_target_query(single(ConstraintKind::kMin, 1, "a")).query;
  std::vector<Term> valid, invalid;
  for (int i = 0; i < 10000; ++i) valid.push_back(e(i));
  for (int i = 10000; i < 30000; ++i) invalid.push_back(e(i));
  SelectQuery q = push_instance_filter(base, valid, invalid, Variable{"x"});
  SelectQuery one = q;
  one.filters[0].entities.resize(1);
  SelectQuery two = q;
  two.filters[0].entities.resize(2);
  const std::size_t per_entity = serialize(two).size() - serialize(one).size();
  const std::size_t fixed = serialize(one).size() - per_entity;
  // Headroom for LIMIT/OFFSET clauses.
  return {q, fixed + per_part * per_entity + 40};
}

}  // namespace

TEST(PartitionPlan, ChunksLongFiltersIntoEqualUnion) {
  const ChunkSetup s = chunk_setup(2000);
  const QueryPlan plan = partition_plan(s.query, s.budget, 10, 1000);
  EXPECT_EQ(plan.parts.size(), 5u);
  EXPECT_FALSE(plan.dropped_filters);
  EXPECT_EQ(plan.page_size, 1000u);
  Graph g;
  for (int i = 0; i < 12000; i += 3) g.add(e(i), Term::iri(kRdfType), Term::iri("http://c/C"));
  std::set<Term> united;
  for (const auto& part : plan.parts) {
    EXPECT_LE(serialize(part).size(), s.budget);
    for (const Term& t : subjects(evaluate_unbounded(g, part))) united.insert(t);
  }
  EXPECT_EQ(united, subjects(evaluate_unbounded(g, s.query)));
}

TEST(PartitionPlan, ShortQueryStaysWhole) {
  const SelectQuery q = push_instance_filter(gen_target_query(single(ConstraintKind::kMin, 1, "a")).query,
                                             std::vector<Term>{e(1)}, std::vector<Term>{e(2), e(3)},
                                             Variable{"x"});
  const QueryPlan plan = partition_plan(q, kDefaultMaxQueryLength, kDefaultMaxParts, 10);
  ASSERT_EQ(plan.parts.size(), 1u);
  EXPECT_NE(plan.parts[0].filter_on(Variable{"x"}), nullptr);
  EXPECT_EQ(plan.page_size, 10u);
}

TEST(PartitionPlan, TooManyPartsDropsTheFilter) {
  const ChunkSetup s = chunk_setup(250);  // 40 parts needed
  const QueryPlan plan = partition_plan(s.query, s.budget, 10, 1000);
  ASSERT_EQ(plan.parts.size(), 1u);
  EXPECT_TRUE(plan.parts[0].filters.empty());
  EXPECT_TRUE(plan.dropped_filters);
}

TEST(OrderPlans, FilteredFirstAndStable) {
  const Shape s = single(ConstraintKind::kMin, 1, "a");
  QueryPlan target = partition_plan(gen_target_query(s), kDefaultMaxQueryLength, 10, 100);
  ShapeQuery min = gen_min_query(s);
  min.query = push_instance_filter(min.query, std::vector<Term>{e(1)}, std::vector<Term>{e(2), e(3)},
                                   Variable{"x"});
  QueryPlan filtered = partition_plan(min, kDefaultMaxQueryLength, 10, 100);
  const auto ordered = order_query_plans({target, filtered});
  EXPECT_EQ(ordered[0].parts, filtered.parts);
  EXPECT_EQ(order_query_plans({target}).size(), 1u);

  QueryPlan a = target, b = target;
  a.constraint = 1;
  b.constraint = 2;
  const auto same = order_query_plans({a, b});
  EXPECT_EQ(same[0].constraint, 1u);
  EXPECT_EQ(same[1].constraint, 2u);
}

TEST(Serialize, IncludeRendersValuesAndPagingRendersLimitOffset) {
  SelectQuery q = push_instance_filter(gen_target_query(single(ConstraintKind::kMin, 1, "a")).query,
                                       std::vector<Term>{e(1), e(2)}, std::vector<Term>{e(3), e(4), e(5)},
                                       Variable{"x"});
  q.limit = 1000;
  q.offset = 1000;
  const std::string text = serialize(q);
  EXPECT_NE(text.find("VALUES ?x { " + e(1).str() + " " + e(2).str() + " }"), std::string::npos);
  EXPECT_NE(text.find("LIMIT 1000\nOFFSET 1000"), std::string::npos);
  EXPECT_EQ(parse_select(text), q);
}

TEST(Serialize, RoundTripsGeneratedQueries) {
  const ShapeSchema s = university();
  for (const auto& shape : s.shapes()) {
    EXPECT_EQ(parse_select(serialize(gen_target_query(shape).query)), gen_target_query(shape).query);
    EXPECT_EQ(parse_select(serialize(gen_min_query(shape).query)), gen_min_query(shape).query);
    for (const auto& m : gen_max_queries(shape)) EXPECT_EQ(parse_select(serialize(m.query)), m.query);
  }
}

TEST(ParseSelect, AcceptsPrefixesAndTheTypeKeyword) {
  const SelectQuery q = parse_select(
      "PREFIX ub: <http://example.org/ub#>\nSELECT $x WHERE { $x a ub:Professor }");
  ASSERT_EQ(q.patterns.size(), 1u);
  EXPECT_EQ(q.patterns[0].predicate, Term::iri(kRdfType));
  EXPECT_EQ(std::get<Term>(q.patterns[0].object), Term::iri("http://example.org/ub#Professor"));
  EXPECT_THROW(parse_select("SELECT ?x WHERE { ?x"), SyntaxError);
}
