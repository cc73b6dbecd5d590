#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <list>
#include <memory>
#include <string>
#include <utility>

#include "travshacl/errors.hpp"
#include "travshacl/graph.hpp"
#include "travshacl/query.hpp"
#include "travshacl/query_builder.hpp"

namespace travshacl {

inline constexpr std::size_t kDefaultMaxAnswers = 10'000;
// Queries longer than this are sent with POST.
inline constexpr std::size_t kGetLengthLimit = 2'000;

struct SourceStats {
  std::size_t queries = 0;
  std::size_t rows = 0;
};

/// Where query answers come from. A single evaluation never returns more than
/// `max_answers()` rows, mirroring the answer cap of public endpoints.
class GraphSource {
 public:
  virtual ~GraphSource() = default;

  ResultSet evaluate(const SelectQuery& query);
  virtual std::size_t max_answers() const = 0;
  virtual void flush_caches() {}
  virtual std::string describe() const = 0;

  const SourceStats& stats() const noexcept { return stats_; }
  void reset_stats() { stats_ = {}; }

 protected:
  virtual ResultSet do_evaluate(const SelectQuery& query) = 0;

 private:
  SourceStats stats_;
};

/// Evaluates directly against an in-memory graph. Full answers of recently
/// seen queries are cached so successive pages do not re-evaluate.
class EmbeddedSource final : public GraphSource {
 public:
  explicit EmbeddedSource(std::shared_ptr<const Graph> graph,
                          std::size_t max_answers = kDefaultMaxAnswers);

  std::size_t max_answers() const override { return max_answers_; }
  void flush_caches() override { cache_.clear(); }
  std::string describe() const override { return "embedded"; }
  const Graph& graph() const { return *graph_; }

 protected:
  ResultSet do_evaluate(const SelectQuery& query) override;

 private:
  std::shared_ptr<const Graph> graph_;
  std::size_t max_answers_;
  std::list<std::pair<std::string, ResultSet>> cache_;  // most recent first
};

struct RemoteOptions {
  std::size_t max_answers = kDefaultMaxAnswers;
  std::chrono::milliseconds timeout{30'000};
};

/// SPARQL 1.1 Protocol client expecting SPARQL JSON results.
class RemoteSource final : public GraphSource {
 public:
  explicit RemoteSource(std::string endpoint, RemoteOptions options = {});

  std::size_t max_answers() const override { return options_.max_answers; }
  std::string describe() const override { return endpoint_; }

  // Method the client uses for a given query text.
  static bool uses_post(const std::string& sparql_text) {
    return sparql_text.size() > kGetLengthLimit;
  }

 protected:
  ResultSet do_evaluate(const SelectQuery& query) override;

 private:
  std::string endpoint_;
  RemoteOptions options_;
};

/// Sends `sparql_text` to `endpoint` and parses the JSON result bindings.
/// Throws TransportError on connection failures, HTTP status >= 400,
/// timeouts, and malformed payloads.
ResultSet remote_execute(const std::string& endpoint, const std::string& sparql_text,
                         std::chrono::milliseconds timeout = std::chrono::milliseconds{30'000});

/// Parses a SPARQL JSON results document (`head.vars`, `results.bindings`).
ResultSet parse_sparql_json(const std::string& payload);
/// Renders a result set as a SPARQL JSON results document.
std::string to_sparql_json(const ResultSet& result);

/// Position of the next page to fetch within a plan.
struct PageCursor {
  std::size_t part = 0;
  std::size_t offset = 0;
};

class StreamAborted : public TransportError {
 public:
  StreamAborted(const TransportError& cause, PageCursor cursor)
      : TransportError(cause.what(), cause.status()), cursor_(cursor) {}
  PageCursor cursor() const noexcept { return cursor_; }

 private:
  PageCursor cursor_;
};

using PageCallback = std::function<void(const ResultSet& page)>;

/// Streams every page of every part of `plan` to `on_page`. Each part is paged
/// with LIMIT/OFFSET until a short page; the page size is capped at the
/// source's answer limit so a truncated page is never mistaken for the last
/// one. With `paging` false each part is sent once without LIMIT/OFFSET,
/// which silently loses answers beyond the source cap.
void evaluate_all_pages(GraphSource& source, const QueryPlan& plan, const PageCallback& on_page,
                        bool paging = true, PageCursor start = {});

/// Minimal SPARQL endpoint over an in-memory graph, for tests and demos.
class StubEndpoint {
 public:
  explicit StubEndpoint(std::shared_ptr<const Graph> graph,
                        std::size_t max_answers = kDefaultMaxAnswers);
  ~StubEndpoint();
  StubEndpoint(const StubEndpoint&) = delete;
  StubEndpoint& operator=(const StubEndpoint&) = delete;

  // Starts serving on 127.0.0.1 (port 0 picks a free port); returns the port.
  int start(int port = 0);
  // Serves on the calling thread until stop().
  void listen_blocking(const std::string& host, int port);
  void stop();
  std::string url() const;

  // Makes every request fail with the given HTTP status (0 disables).
  void set_failure_status(int status);
  // Method of the last request ("GET" / "POST").
  std::string last_method() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace travshacl
