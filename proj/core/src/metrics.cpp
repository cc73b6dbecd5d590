#include "travshacl/metrics.hpp"

#include <cmath>

#include "travshacl/errors.hpp"

namespace travshacl {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kTrue: return "valid";
    case Verdict::kFalse: return "invalid";
    default: return "unknown";
  }
}

Verdict parse_verdict(const std::string& s) {
  if (s == "valid") return Verdict::kTrue;
  if (s == "invalid") return Verdict::kFalse;
  if (s == "unknown") return Verdict::kUnknown;
  throw Error("unknown verdict '" + s + "'");
}

double dief_at_t(const AnswerTrace& trace, double t) {
  if (t <= 0) return 0;
  // The count jumps by one at each timestamp; each step contributes the
  // rectangle from its timestamp to the next one (or to t).
  double area = 0;
  const auto& e = trace.entries;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double from = e[i].elapsed_seconds;
    if (from >= t) break;
    const double to = (i + 1 < e.size()) ? std::min(e[i + 1].elapsed_seconds, t) : t;
    area += static_cast<double>(i + 1) * (to - from);
  }
  return area;
}

MetricSet summarize(const AnswerTrace& trace) {
  MetricSet m;
  m.validation_time = trace.run_seconds;
  m.comp = trace.entries.size();
  m.tfff = trace.entries.empty() ? 0 : trace.entries.front().elapsed_seconds;
  m.throughput = m.validation_time > 0 ? static_cast<double>(m.comp) / m.validation_time : 0;
  m.dief_t = dief_at_t(trace, m.validation_time);
  return m;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd r;
  if (values.empty()) return r;
  double sum = 0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return r;
  double sq = 0;
  for (double v : values) sq += (v - r.mean) * (v - r.mean);
  r.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  return r;
}

}  // namespace travshacl
