// travshacl: validate, plan, bench generate, bench matrix, metrics, serve.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>

#include "travshacl/bench.hpp"
#include "travshacl/dependency_graph.hpp"
#include "travshacl/errors.hpp"
#include "travshacl/graph.hpp"
#include "travshacl/planner.hpp"
#include "travshacl/report.hpp"
#include "travshacl/source.hpp"
#include "travshacl/validation.hpp"

namespace fs = std::filesystem;
using namespace travshacl;

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kSchemaError = 2, kTransportError = 3 };

struct Failure {
  int code;
  std::string message;
};

struct PlanOpts {
  std::string strategy = "dfs";
  std::string seed_degree = "in";
  std::string seed_constraints = "many";
  std::uint64_t rng_seed = 0;
};

struct RunOpts {
  std::string schema;
  std::string data;
  std::string endpoint;
  std::size_t max_answers = kDefaultMaxAnswers;
  std::size_t page_size = kDefaultPageSize;
  std::size_t max_query_len = kDefaultMaxQueryLength;
  std::size_t max_parts = kDefaultMaxParts;
  double timeout = 30;
  std::string rewriting = "on";
  bool no_paging = false;
  std::string out = "report";
  bool quiet = false;
};

void log_line(const std::string& s) { std::cerr << s << '\n'; }

PlannerConfig planner_config(const PlanOpts& p) {
  try {
    PlannerConfig c;
    c.strategy = parse_strategy(p.strategy);
    c.connectivity = parse_connectivity(p.seed_degree);
    c.tiebreak = parse_tiebreak(p.seed_constraints);
    c.rng_seed = p.rng_seed;
    return c;
  } catch (const Error& e) {
    throw Failure{kConfigError, e.what()};
  }
}

// Schema problems of any kind (unreadable, malformed, dangling references,
// negation through recursion) share one exit code.
ShapeSchema load_schema_checked(const std::string& path) {
  try {
    ShapeSchema schema = load_schema_file(path);
    stratify(build_dependency_graph(schema));
    return schema;
  } catch (const Error& e) {
    throw Failure{kSchemaError, std::string("schema error: ") + e.what()};
  }
}

void add_planner_flags(CLI::App* cmd, PlanOpts& p) {
  cmd->add_option("--strategy", p.strategy, "bfs | dfs | random")
      ->envname("SHACLTRAV_STRATEGY")
      ->check(CLI::IsMember({"bfs", "dfs", "random"}))
      ->capture_default_str();
  cmd->add_option("--seed-degree", p.seed_degree, "seed heuristic: in | out")
      ->envname("SHACLTRAV_SEED_DEGREE")
      ->check(CLI::IsMember({"in", "out"}))
      ->capture_default_str();
  cmd->add_option("--seed-constraints", p.seed_constraints, "tie-break: many | few")
      ->envname("SHACLTRAV_SEED_CONSTRAINTS")
      ->check(CLI::IsMember({"many", "few"}))
      ->capture_default_str();
  cmd->add_option("--rng-seed", p.rng_seed, "seed of the random strategy")
      ->envname("SHACLTRAV_RNG_SEED")
      ->capture_default_str();
}

void add_run_flags(CLI::App* cmd, RunOpts& r) {
  cmd->add_option("--max-answers", r.max_answers, "answer cap of the embedded source")
      ->envname("SHACLTRAV_MAX_ANSWERS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--page-size", r.page_size, "LIMIT of each page")
      ->envname("SHACLTRAV_PAGE_SIZE")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-query-len", r.max_query_len, "split queries longer than this")
      ->envname("SHACLTRAV_MAX_QUERY_LEN")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-parts", r.max_parts, "most sub-queries per split")
      ->envname("SHACLTRAV_MAX_PARTS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--rewriting", r.rewriting, "on | off (off: baseline)")
      ->envname("SHACLTRAV_REWRITING")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  cmd->add_flag("--no-paging", r.no_paging, "send each query once (diagnostic)")
      ->envname("SHACLTRAV_NO_PAGING");
  cmd->add_flag("-q,--quiet", r.quiet, "no progress on stderr")->envname("SHACLTRAV_QUIET");
}

ValidationConfig validation_config(const PlanOpts& p, const RunOpts& r) {
  ValidationConfig c;
  c.planner = planner_config(p);
  c.rewriting = r.rewriting == "on";
  c.paging = !r.no_paging;
  c.page_size = r.page_size;
  c.max_query_len = r.max_query_len;
  c.max_parts = r.max_parts;
  if (!r.quiet) c.on_event = log_line;
  return c;
}

std::shared_ptr<const Graph> load_data(const std::string& path) {
  try {
    return std::make_shared<const Graph>(load_ntriples_file(path));
  } catch (const Error& e) {
    throw Failure{kConfigError, std::string("data error: ") + e.what()};
  }
}

// ---------------------------------------------------------------------------

int cmd_validate(const PlanOpts& p, const RunOpts& r) {
  if (r.data.empty() == r.endpoint.empty()) {
    throw Failure{kConfigError, "give exactly one of --data and --endpoint"};
  }
  const ShapeSchema schema = load_schema_checked(r.schema);
  const ValidationConfig config = validation_config(p, r);

  std::unique_ptr<GraphSource> source;
  std::string dataset;
  if (!r.data.empty()) {
    if (!r.quiet) log_line("loading " + r.data);
    source = std::make_unique<EmbeddedSource>(load_data(r.data), r.max_answers);
    dataset = r.data;
  } else {
    RemoteOptions ro;
    ro.max_answers = r.max_answers;
    ro.timeout = std::chrono::milliseconds(static_cast<long long>(r.timeout * 1000));
    source = std::make_unique<RemoteSource>(r.endpoint, ro);
    dataset = r.endpoint;
  }

  ValidationResult result;
  try {
    result = run_validation(schema, *source, config);
  } catch (const PlanningError& e) {
    throw Failure{kSchemaError, std::string("schema error: ") + e.what()};
  }
  try {
    write_report(result, r.out, dataset);
  } catch (const Error& e) {
    throw Failure{kConfigError, e.what()};
  }

  std::size_t valid = 0, invalid = 0;
  for (const auto& v : result.verdicts) {
    if (v.verdict == Verdict::kTrue) ++valid;
    else if (v.verdict == Verdict::kFalse) ++invalid;
  }
  const MetricSet m = summarize(result.trace);
  std::printf("%zu verdicts (%zu valid, %zu invalid) in %.3f s; %zu queries, %zu rules grounded\n",
              result.verdicts.size(), valid, invalid, m.validation_time, result.queries,
              result.rules_grounded);
  std::printf("report written to %s\n", r.out.c_str());
  if (result.partial) {
    std::fprintf(stderr, "transport failure: %s\n", result.error.c_str());
    return kTransportError;
  }
  return kOk;
}

int cmd_plan(const std::string& schema_path, const PlanOpts& p) {
  const PlannerConfig config = planner_config(p);
  ShapeSchema schema;
  DependencyGraph graph;
  std::vector<std::vector<std::string>> strata;
  try {
    schema = load_schema_file(schema_path);
    graph = build_dependency_graph(schema);
    strata = stratify(graph);
  } catch (const Error& e) {
    throw Failure{kSchemaError, std::string("schema error: ") + e.what()};
  }

  std::printf("configuration: %s\n\n", describe(config).c_str());
  std::printf("%-28s %6s %6s %6s %8s\n", "shape", "in", "out", "|C|", "target");
  const auto degrees = degree_stats(graph);
  for (const auto& s : schema.shapes()) {
    const Degree d = degrees.at(s.name);
    std::printf("%-28s %6zu %6zu %6zu %8s\n", s.name.c_str(), d.in, d.out, s.constraints.size(),
                s.target ? "yes" : "no");
  }
  std::printf("\nedges:\n");
  for (const auto& e : graph.edges) {
    std::printf("  %s -> %s (%s)\n", e.from.c_str(), e.to.c_str(),
                e.sign == EdgeSign::kPositive ? "+" : "-");
  }

  std::printf("\nstrata:\n");
  for (std::size_t i = 0; i < strata.size(); ++i) {
    std::string names;
    for (const auto& n : strata[i]) names += (names.empty() ? "" : ", ") + n;
    std::printf("  %zu: %s\n", i, names.c_str());
  }

  try {
    if (config.strategy == TraversalStrategy::kRandom) {
      std::printf("\nseed: none (random order, rng seed %llu)\n",
                  static_cast<unsigned long long>(config.rng_seed));
    } else {
      const SeedChoice seed = select_seed_explained(schema, graph, config);
      std::string cands;
      for (const auto& c : seed.candidates) cands += (cands.empty() ? "" : ", ") + c;
      std::printf("\nseed: %s (decided by %s; candidates: %s)\n", seed.shape.c_str(),
                  seed.decided_by.c_str(), cands.c_str());
    }
    const TraversalPlan plan = plan_traversal(schema, config);
    std::printf("\ntraversal order:\n");
    for (std::size_t i = 0; i < plan.order.size(); ++i) {
      std::printf("  %zu. %s\n", i + 1, plan.order[i].c_str());
    }
  } catch (const PlanningError& e) {
    std::printf("\nno plan: %s\n", e.what());
    return kSchemaError;
  }
  return kOk;
}

struct GenOpts {
  std::size_t size = 3;
  std::size_t scale = kSmallScale;
  double invalid_pct = 0;
  std::uint64_t seed = 1;
  std::string out = "testbed";
};

int cmd_generate(const GenOpts& g) {
  Testbed tb;
  try {
    tb = generate_benchmark({g.size, g.scale, g.invalid_pct, g.seed});
    write_testbed(tb, g.out);
  } catch (const Error& e) {
    throw Failure{kConfigError, e.what()};
  }
  std::printf("%s: %zu triples, %zu targeted, %zu invalid (%.2f%%) -> %s\n",
              tb.spec.label().c_str(), tb.triples, tb.targeted, tb.invalid,
              100.0 * tb.invalid_fraction, g.out.c_str());
  return kOk;
}

struct MatrixOpts {
  std::vector<std::size_t> sizes{3, 7, 14};
  std::vector<std::size_t> scales{kSmallScale, kMediumScale, kLargeScale};
  std::uint64_t seed = 1;
  std::uint64_t rng_seed = 0;
  std::size_t reps = 1;
  std::size_t parallel_cells = 1;
  std::size_t max_answers = kDefaultMaxAnswers;
  std::string out = "matrix";
  bool quiet = false;
};

int cmd_matrix(const MatrixOpts& o) {
  std::vector<BenchSpec> specs;
  for (const auto& s : default_matrix(o.seed, o.scales)) {
    if (std::find(o.sizes.begin(), o.sizes.end(), s.schema_size) != o.sizes.end()) specs.push_back(s);
  }
  std::vector<Testbed> testbeds;
  for (const auto& spec : specs) {
    if (!o.quiet) log_line("generating " + spec.label());
    try {
      testbeds.push_back(generate_benchmark(spec));
    } catch (const Error& e) {
      throw Failure{kConfigError, e.what()};
    }
  }

  MatrixOptions mo;
  mo.repetitions = o.reps;
  mo.parallel_cells = o.parallel_cells;
  mo.max_answers = o.max_answers;
  if (!o.quiet) mo.on_progress = log_line;
  mo.on_cell = [&](const MatrixRow& row, const ValidationResult& last) {
    write_report(last, fs::path(o.out) / row.testbed / row.config, row.testbed);
  };
  const auto configs = matrix_configurations(o.rng_seed);
  for (const auto& c : configs) {
    std::error_code ec;
    for (const auto& tb : testbeds) fs::create_directories(fs::path(o.out) / tb.spec.label() / c.label, ec);
  }
  const auto rows = run_matrix(testbeds, configs, mo);
  const std::string table = format_matrix(rows);
  std::printf("%s", table.c_str());
  std::ofstream(fs::path(o.out) / "matrix.txt") << table;

  nlohmann::json doc = nlohmann::json::array();
  bool failed = false;
  for (const auto& r : rows) {
    failed = failed || !r.error.empty() || !r.matches_truth;
    doc.push_back({{"testbed", r.testbed},
                   {"config", r.config},
                   {"runs", r.runs},
                   {"validation_time_mean", r.validation_time.mean},
                   {"validation_time_stddev", r.validation_time.stddev},
                   {"tfff_mean", r.tfff.mean},
                   {"dief_t_mean", r.dief_t.mean},
                   {"dief_t_stddev", r.dief_t.stddev},
                   {"comp", r.comp},
                   {"rules_grounded", r.rules_grounded},
                   {"matches_truth", r.matches_truth},
                   {"error", r.error}});
  }
  std::ofstream(fs::path(o.out) / "matrix.json") << doc.dump(2) << '\n';
  return failed ? kConfigError : kOk;
}

int cmd_metrics(const std::string& dir, std::optional<double> at) {
  AnswerTrace trace;
  try {
    trace = read_report_trace(dir);
  } catch (const Error& e) {
    throw Failure{kConfigError, e.what()};
  }
  const MetricSet m = summarize(trace);
  nlohmann::json out{{"validation_time", m.validation_time}, {"tfff", m.tfff},
                     {"throughput", m.throughput},           {"comp", m.comp},
                     {"dief_t", m.dief_t}};
  if (at) out["dief_at"] = {{"t", *at}, {"value", dief_at_t(trace, *at)}};
  std::printf("%s\n", out.dump(2).c_str());
  return kOk;
}

int cmd_serve(const std::string& data, const std::string& host, int port, std::size_t max_answers) {
  StubEndpoint endpoint(load_data(data), max_answers);
  std::fprintf(stderr, "serving %s on http://%s:%d/sparql\n", data.c_str(), host.c_str(), port);
  endpoint.listen_blocking(host, port);
  return kOk;
}

// Applies a JSON config file as option defaults of `cmd`, so command-line
// flags and environment variables still take precedence.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kConfigError, "cannot read config file '" + path + "'"};
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Failure{kConfigError, path + ": " + e.what()};
  }
  if (!doc.is_object()) throw Failure{kConfigError, path + ": expected an object"};
  for (const auto& [key, value] : doc.items()) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    CLI::Option* opt = cmd->get_option_no_throw("--" + flag);
    if (!opt) throw Failure{kConfigError, path + ": unknown setting '" + key + "'"};
    const std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    try {
      opt->default_val(text);
      opt->required(false);  // satisfied by the file
    } catch (const CLI::Error& e) {
      throw Failure{kConfigError, path + ": " + key + ": " + e.what()};
    }
  }
}

std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  if (const char* env = std::getenv("SHACLTRAV_CONFIG")) return env;
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traversal-optimizing SHACL validation"};
  app.require_subcommand(1);
  std::string config_file;

  PlanOpts plan_opts;
  RunOpts run_opts;
  auto* validate = app.add_subcommand("validate", "validate a graph against a shape schema");
  validate->add_option("--schema", run_opts.schema, "shape schema (JSON)")
      ->envname("SHACLTRAV_SCHEMA")
      ->required();
  validate->add_option("--data", run_opts.data, "N-Triples file")->envname("SHACLTRAV_DATA");
  validate->add_option("--endpoint", run_opts.endpoint, "SPARQL endpoint URL")
      ->envname("SHACLTRAV_ENDPOINT");
  validate->add_option("--timeout", run_opts.timeout, "seconds per remote request")
      ->envname("SHACLTRAV_TIMEOUT")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  validate->add_option("--out", run_opts.out, "report directory")
      ->envname("SHACLTRAV_OUT")
      ->capture_default_str();
  add_planner_flags(validate, plan_opts);
  add_run_flags(validate, run_opts);

  std::string plan_schema;
  auto* plan = app.add_subcommand("plan", "explain the traversal plan of a schema");
  plan->add_option("--schema", plan_schema, "shape schema (JSON)")
      ->envname("SHACLTRAV_SCHEMA")
      ->required();
  add_planner_flags(plan, plan_opts);

  auto* bench = app.add_subcommand("bench", "synthetic testbeds");
  bench->require_subcommand(1);
  GenOpts gen;
  auto* generate = bench->add_subcommand("generate", "write one testbed");
  generate->add_option("--size", gen.size, "schema tier: 3, 7, 14 (or 4: university)")
      ->check(CLI::IsMember({3, 4, 7, 14}))
      ->envname("SHACLTRAV_SIZE")
      ->capture_default_str();
  generate->add_option("--scale", gen.scale, "approximate triple count")
      ->envname("SHACLTRAV_SCALE")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  generate->add_option("--invalid-pct", gen.invalid_pct, "target share of invalid entities")
      ->envname("SHACLTRAV_INVALID_PCT")
      ->check(CLI::Range(0.0, 100.0))
      ->capture_default_str();
  generate->add_option("--seed", gen.seed, "generator seed")
      ->envname("SHACLTRAV_SEED")
      ->capture_default_str();
  generate->add_option("--out", gen.out, "output directory")
      ->envname("SHACLTRAV_OUT")
      ->capture_default_str();

  MatrixOpts mat;
  auto* matrix = bench->add_subcommand("matrix", "run every planner configuration on every testbed");
  matrix->add_option("--sizes", mat.sizes, "schema tiers")
      ->envname("SHACLTRAV_SIZES")
      ->check(CLI::IsMember({3, 7, 14}));
  matrix->add_option("--scales", mat.scales, "triple counts")->envname("SHACLTRAV_SCALES");
  matrix->add_option("--seed", mat.seed, "generator seed")
      ->envname("SHACLTRAV_SEED")
      ->capture_default_str();
  matrix->add_option("--rng-seed", mat.rng_seed, "seed of the random strategy")
      ->envname("SHACLTRAV_RNG_SEED")
      ->capture_default_str();
  matrix->add_option("--reps", mat.reps, "runs per cell")
      ->envname("SHACLTRAV_REPS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  matrix->add_option("--parallel-cells", mat.parallel_cells, "cells run concurrently")
      ->envname("SHACLTRAV_PARALLEL_CELLS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  matrix->add_option("--max-answers", mat.max_answers, "answer cap of the embedded source")
      ->envname("SHACLTRAV_MAX_ANSWERS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  matrix->add_option("--out", mat.out, "output directory")
      ->envname("SHACLTRAV_OUT")
      ->capture_default_str();
  matrix->add_flag("-q,--quiet", mat.quiet, "no progress on stderr")->envname("SHACLTRAV_QUIET");

  std::string metrics_dir;
  std::optional<double> metrics_at;
  auto* metrics = app.add_subcommand("metrics", "recompute metrics of a report directory");
  metrics->add_option("report", metrics_dir, "report directory")->required();
  metrics->add_option("--at", metrics_at, "also print dief@t at this time");

  std::string serve_data, serve_host = "127.0.0.1";
  int serve_port = 8890;
  std::size_t serve_cap = kDefaultMaxAnswers;
  auto* serve = app.add_subcommand("serve", "serve an N-Triples file as a SPARQL endpoint");
  serve->add_option("--data", serve_data, "N-Triples file")->envname("SHACLTRAV_DATA")->required();
  serve->add_option("--host", serve_host)->capture_default_str();
  serve->add_option("--port", serve_port)->envname("SHACLTRAV_PORT")->capture_default_str();
  serve->add_option("--max-answers", serve_cap, "answer cap per request")
      ->envname("SHACLTRAV_MAX_ANSWERS")
      ->capture_default_str();

  for (auto* cmd : {validate, plan, generate, matrix}) {
    cmd->add_option("--config", config_file, "JSON file of option defaults")
        ->envname("SHACLTRAV_CONFIG");
  }

  try {
    if (const std::string cfg = find_config_arg(argc, argv); !cfg.empty()) {
      // The subcommand is not known before parsing, so defaults go to every
      // command that accepts all of the file's settings.
      std::optional<Failure> first;
      bool applied = false;
      for (auto* cmd : {validate, plan, generate, matrix}) {
        try {
          apply_config_file(cmd, cfg);
          applied = true;
        } catch (const Failure& f) {
          if (!first) first = f;
        }
      }
      if (!applied) throw *first;
    }
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? kOk : kConfigError;
    }

    if (*validate) return cmd_validate(plan_opts, run_opts);
    if (*plan) return cmd_plan(plan_schema, plan_opts);
    if (*generate) return cmd_generate(gen);
    if (*matrix) return cmd_matrix(mat);
    if (*metrics) return cmd_metrics(metrics_dir, metrics_at);
    if (*serve) return cmd_serve(serve_data, serve_host, serve_port, serve_cap);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.code;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "schema error: %s\n", e.what());
    return kSchemaError;
  } catch (const TransportError& e) {
    std::fprintf(stderr, "transport failure: %s\n", e.what());
    return kTransportError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  }
  return kOk;
}
