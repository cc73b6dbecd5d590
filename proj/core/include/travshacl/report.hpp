#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "travshacl/metrics.hpp"
#include "travshacl/validation.hpp"

namespace travshacl {

inline constexpr const char* kVerdictFile = "verdicts.csv";
inline constexpr const char* kTraceFile = "trace.csv";
inline constexpr const char* kMetricsFile = "metrics.json";

/// Writes verdicts.csv, trace.csv and metrics.json into `dir` (created if
/// missing). Throws Error when the directory is not writable.
void write_report(const ValidationResult& result, const std::filesystem::path& dir,
                  const std::string& dataset = {});

std::string csv_field(const std::string& s);
// Splits one CSV record; quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_csv_record(const std::string& line);

std::vector<VerdictRecord> read_verdicts(const std::filesystem::path& file);
AnswerTrace read_trace(const std::filesystem::path& file);

struct StoredMetrics {
  MetricSet metrics;
  bool partial = false;
  std::string config;
  std::string dataset;
  std::size_t rules_grounded = 0;
};
StoredMetrics read_metrics(const std::filesystem::path& file);

/// Reads a report directory back: the trace with its run length restored.
AnswerTrace read_report_trace(const std::filesystem::path& dir);

}  // namespace travshacl
