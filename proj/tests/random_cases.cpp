#include "random_cases.hpp"

#include <random>

namespace testing_support {

using namespace travshacl;

namespace {

const std::string kNs = "http://example.org/r#";

std::string iri(const std::string& local) { return "<" + kNs + local + ">"; }

}  // namespace

RandomCase random_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto below = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  const std::size_t shape_count = 1 + below(6);
  const std::size_t preds = 2 + below(3);
  const std::size_t classes = 1 + below(4);
  const std::size_t entities = 5 + below(56);

  // Shapes are grouped into non-decreasing levels. References never point to
  // a higher level and non-monotone ones (negation, max) only to a lower one,
  // so positive cycles stay inside a level and the schema is stratifiable.
  std::vector<std::size_t> level(shape_count, 0);
  for (std::size_t i = 1; i < shape_count; ++i) level[i] = level[i - 1] + (chance(0.5) ? 1 : 0);

  std::vector<Shape> shapes(shape_count);
  for (std::size_t i = 0; i < shape_count; ++i) {
    Shape& s = shapes[i];
    s.name = "S" + std::to_string(i);
    if (i == 0 || chance(0.8)) {
      s.target = TargetDefinition{Term::iri(kNs + "C" + std::to_string(below(classes))), {}};
    }
    const std::size_t k = 1 + below(4);
    for (std::size_t c = 0; c < k; ++c) {
      Constraint con;
      con.path = Term::iri(kNs + "p" + std::to_string(below(preds)));
      const bool reference = shape_count > 1 && chance(0.5);
      if (reference) {
        std::size_t j = below(shape_count);
        while (level[j] > level[i]) j = below(shape_count);
        const bool may_negate = level[j] < level[i];
        con.shape_ref = ShapeRef{"S" + std::to_string(j), may_negate && chance(0.3)};
        con.kind = may_negate && chance(0.3) ? ConstraintKind::kMax : ConstraintKind::kMin;
      } else {
        con.kind = chance(0.6) ? ConstraintKind::kMin : ConstraintKind::kMax;
        if (chance(0.15)) {
          con.value_filter = ValueFilter{ValueFilter::Kind::kDatatype, Term::iri(kXsdInteger)};
        } else if (chance(0.1)) {
          con.value_filter = ValueFilter{ValueFilter::Kind::kConstant,
                                         Term::iri(kNs + "e" + std::to_string(below(entities)))};
        }
      }
      con.count = con.kind == ConstraintKind::kMin ? 1 + below(3) : below(4);
      s.constraints.push_back(std::move(con));
    }
  }

  std::string nt;
  const std::size_t budget = 1 + below(2000);
  std::size_t lines = 0;
  auto emit = [&](const std::string& line) {
    if (lines < budget) {
      nt += line;
      ++lines;
    }
  };
  for (std::size_t e = 0; e < entities; ++e) {
    const std::string subj = iri("e" + std::to_string(e));
    const std::size_t types = below(3);
    for (std::size_t t = 0; t < types; ++t) {
      emit(subj + " <" + std::string(kRdfType) + "> " + iri("C" + std::to_string(below(classes))) + " .\n");
    }
    const std::size_t edges = below(8);
    for (std::size_t k = 0; k < edges; ++k) {
      const std::string p = iri("p" + std::to_string(below(preds)));
      std::string o;
      const std::size_t kind = below(10);
      if (kind < 6) o = iri("e" + std::to_string(below(entities)));
      else if (kind < 8) o = "\"" + std::to_string(below(50)) + "\"^^<" + std::string(kXsdInteger) + ">";
      else o = "\"v" + std::to_string(below(5)) + "\"";
      emit(subj + " " + p + " " + o + " .\n");
      if (chance(0.05)) emit(subj + " " + p + " " + o + " .\n");  // duplicate line
    }
  }

  RandomCase rc;
  rc.schema = ShapeSchema(std::move(shapes));
  rc.ntriples = std::move(nt);
  rc.graph = std::make_shared<const Graph>(load_ntriples_text(rc.ntriples));
  return rc;
}

}  // namespace testing_support
