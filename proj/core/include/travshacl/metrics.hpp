#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "travshacl/term.hpp"

namespace travshacl {

enum class Verdict : unsigned char { kUnknown, kTrue, kFalse };

const char* to_string(Verdict v);
Verdict parse_verdict(const std::string& s);

struct TraceEntry {
  double elapsed_seconds = 0;
  Term entity;
  std::string shape;
  Verdict verdict = Verdict::kUnknown;
  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

/// Timestamped stream of final verdicts, one entry per (entity, shape).
struct AnswerTrace {
  std::vector<TraceEntry> entries;
  std::string config;
  std::string dataset;
  // Wall-clock length of the run in seconds, start to finish.
  double run_seconds = 0;
  bool partial = false;
};

struct MetricSet {
  double validation_time = 0;  // seconds
  double tfff = 0;             // time to first verdict, seconds
  double throughput = 0;       // verdicts per second
  std::size_t comp = 0;        // valid + invalid verdicts
  double dief_t = 0;           // dief@t at t = validation_time
  friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

/// Area under the cumulative verdict count over [0, t], integrated exactly as
/// a step function.
double dief_at_t(const AnswerTrace& trace, double t);

MetricSet summarize(const AnswerTrace& trace);

struct MeanStd {
  double mean = 0;
  double stddev = 0;  // sample standard deviation; 0 for fewer than 2 values
};
MeanStd mean_std(const std::vector<double>& values);

}  // namespace travshacl
