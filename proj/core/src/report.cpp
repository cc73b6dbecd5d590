#include "travshacl/report.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "travshacl/errors.hpp"

namespace travshacl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  return out;
}

std::ifstream open_in(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot read " + file.string());
  return in;
}

std::string seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", s);
  return buf;
}

}  // namespace

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw SyntaxError("unterminated quoted CSV field", line.size());
  return fields;
}

void write_report(const ValidationResult& result, const fs::path& dir, const std::string& dataset) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

  {
    auto out = open_out(dir / kVerdictFile);
    out << "entity,shape,verdict\n";
    for (const auto& v : result.verdicts) {
      if (v.verdict == Verdict::kUnknown) continue;
      out << csv_field(v.entity.str()) << ',' << csv_field(v.shape) << ',' << to_string(v.verdict)
          << '\n';
    }
  }
  {
    auto out = open_out(dir / kTraceFile);
    out << "elapsed_seconds,entity,shape,verdict\n";
    for (const auto& e : result.trace.entries) {
      out << seconds(e.elapsed_seconds) << ',' << csv_field(e.entity.str()) << ','
          << csv_field(e.shape) << ',' << to_string(e.verdict) << '\n';
    }
  }
  {
    const MetricSet m = summarize(result.trace);
    json doc;
    doc["validation_time"] = m.validation_time;
    doc["tfff"] = m.tfff;
    doc["throughput"] = m.throughput;
    doc["comp"] = m.comp;
    doc["dief_t"] = m.dief_t;
    doc["partial"] = result.partial;
    doc["config"] = result.trace.config;
    doc["dataset"] = dataset;
    doc["rules_grounded"] = result.rules_grounded;
    doc["entities_retrieved"] = result.entities_retrieved;
    doc["queries"] = result.queries;
    if (!result.error.empty()) doc["error"] = result.error;
    auto out = open_out(dir / kMetricsFile);
    out << doc.dump(2) << '\n';
  }
}

std::vector<VerdictRecord> read_verdicts(const fs::path& file) {
  auto in = open_in(file);
  std::vector<VerdictRecord> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_record(line);
    if (f.size() != 3) throw SyntaxError("verdict record needs 3 fields: " + line, 0);
    out.push_back({Term::from_canonical(f[0]), f[1], parse_verdict(f[2])});
  }
  return out;
}

AnswerTrace read_trace(const fs::path& file) {
  auto in = open_in(file);
  AnswerTrace trace;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_record(line);
    if (f.size() != 4) throw SyntaxError("trace record needs 4 fields: " + line, 0);
    trace.entries.push_back(
        {std::stod(f[0]), Term::from_canonical(f[1]), f[2], parse_verdict(f[3])});
  }
  return trace;
}

StoredMetrics read_metrics(const fs::path& file) {
  auto in = open_in(file);
  StoredMetrics s;
  try {
    const json doc = json::parse(in);
    s.metrics.validation_time = doc.at("validation_time").get<double>();
    s.metrics.tfff = doc.at("tfff").get<double>();
    s.metrics.throughput = doc.at("throughput").get<double>();
    s.metrics.comp = doc.at("comp").get<std::size_t>();
    s.metrics.dief_t = doc.at("dief_t").get<double>();
    s.partial = doc.value("partial", false);
    s.config = doc.value("config", "");
    s.dataset = doc.value("dataset", "");
    s.rules_grounded = doc.value("rules_grounded", std::size_t{0});
  } catch (const json::exception& e) {
    throw SyntaxError(file.string() + ": " + e.what(), 0);
  }
  return s;
}

AnswerTrace read_report_trace(const fs::path& dir) {
  AnswerTrace trace = read_trace(dir / kTraceFile);
  const StoredMetrics m = read_metrics(dir / kMetricsFile);
  trace.run_seconds = m.metrics.validation_time;
  trace.config = m.config;
  trace.dataset = m.dataset;
  trace.partial = m.partial;
  return trace;
}

}  // namespace travshacl
