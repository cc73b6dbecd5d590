#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "travshacl/metrics.hpp"
#include "travshacl/schema.hpp"
#include "travshacl/validation.hpp"

namespace travshacl {

/// Parameters of one synthetic testbed. `schema_size` is 3, 7 or 14 for the
/// three schema tiers, or 4 for the university schema of the running example.
struct BenchSpec {
  std::size_t schema_size = 3;
  std::size_t scale = 10'000;  // approximate number of triples
  double invalid_pct = 0;      // target share of invalid targeted entities
  std::uint64_t seed = 1;

  std::string label() const;
  friend bool operator==(const BenchSpec&, const BenchSpec&) = default;
};

struct Testbed {
  BenchSpec spec;
  std::string schema_json;
  std::string ntriples;
  std::string manifest_json;
  std::size_t triples = 0;
  std::size_t targeted = 0;
  std::size_t invalid = 0;
  double invalid_fraction = 0;
  // Ground truth from reference_verdicts, in report order.
  std::vector<VerdictRecord> truth;
};

/// The schema of a tier; throws Error for unsupported sizes.
ShapeSchema bench_schema(std::size_t schema_size);

/// Deterministic in (spec): same spec, byte-identical artifacts. Throws Error
/// for infeasible specs.
Testbed generate_benchmark(const BenchSpec& spec);

inline constexpr const char* kSchemaFile = "schema.json";
inline constexpr const char* kDataFile = "data.nt";
inline constexpr const char* kManifestFile = "manifest.json";

void write_testbed(const Testbed& testbed, const std::filesystem::path& dir);
// Ground-truth verdicts stored in a manifest file.
std::vector<VerdictRecord> read_manifest_truth(const std::filesystem::path& file);

/// Desk scales for the matrix.
inline constexpr std::size_t kSmallScale = 10'000;
inline constexpr std::size_t kMediumScale = 50'000;
inline constexpr std::size_t kLargeScale = 200'000;

/// Invalid percentages per tier (small, medium and large graphs share them).
std::vector<double> tier_invalid_percentages(std::size_t schema_size);

/// The 27 cells: tiers 3/7/14, three scales, three invalid percentages.
std::vector<BenchSpec> default_matrix(std::uint64_t seed = 1,
                                      std::vector<std::size_t> scales = {kSmallScale, kMediumScale,
                                                                         kLargeScale});

struct NamedConfig {
  std::string label;
  ValidationConfig config;
};

/// The nine planner variants (eight deterministic plus random) followed by
/// the rewriting-off baseline.
std::vector<NamedConfig> matrix_configurations(std::uint64_t rng_seed = 0);

struct MatrixRow {
  std::string testbed;
  std::string config;
  std::size_t runs = 0;
  MeanStd validation_time;
  MeanStd dief_t;
  MeanStd tfff;
  std::size_t comp = 0;
  std::size_t rules_grounded = 0;
  bool matches_truth = false;
  std::string error;  // empty when every run succeeded
  // Verdicts of the last run, kept when MatrixOptions::keep_verdicts is set.
  std::vector<VerdictRecord> verdicts;
};

struct MatrixOptions {
  std::size_t repetitions = 1;
  std::size_t parallel_cells = 1;
  std::size_t max_answers = 10'000;
  bool keep_verdicts = false;
  std::function<void(const std::string&)> on_progress;
  // Called with the last run of every successful cell, serialized across
  // workers.
  std::function<void(const MatrixRow&, const ValidationResult&)> on_cell;
};

/// Runs every (testbed x config) cell `repetitions` times; a failing cell is
/// recorded and the matrix continues.
std::vector<MatrixRow> run_matrix(const std::vector<Testbed>& testbeds,
                                  const std::vector<NamedConfig>& configs,
                                  const MatrixOptions& options = {});

std::string format_matrix(const std::vector<MatrixRow>& rows);

}  // namespace travshacl
