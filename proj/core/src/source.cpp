#include "travshacl/source.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <mutex>
#include <nlohmann/json.hpp>
#include <thread>

namespace travshacl {

using nlohmann::json;

ResultSet GraphSource::evaluate(const SelectQuery& query) {
  ResultSet r = do_evaluate(query);
  if (r.rows.size() > max_answers()) r.rows.resize(max_answers());
  ++stats_.queries;
  stats_.rows += r.rows.size();
  return r;
}

// ---------------------------------------------------------------------------
// Embedded

EmbeddedSource::EmbeddedSource(std::shared_ptr<const Graph> graph, std::size_t max_answers)
    : graph_(std::move(graph)), max_answers_(max_answers) {
  if (max_answers_ == 0) throw Error("max_answers must be positive");
}

ResultSet EmbeddedSource::do_evaluate(const SelectQuery& query) {
  SelectQuery unpaged = query;
  unpaged.limit.reset();
  unpaged.offset.reset();
  const std::string key = serialize(unpaged);

  auto it = std::find_if(cache_.begin(), cache_.end(),
                         [&](const auto& entry) { return entry.first == key; });
  if (it == cache_.end()) {
    cache_.emplace_front(key, evaluate_unbounded(*graph_, unpaged));
    if (cache_.size() > 8) cache_.pop_back();
    it = cache_.begin();
  } else if (it != cache_.begin()) {
    cache_.splice(cache_.begin(), cache_, it);
    it = cache_.begin();
  }
  const ResultSet& full = it->second;

  ResultSet out;
  out.variables = full.variables;
  const std::size_t offset = std::min(query.offset.value_or(0), full.rows.size());
  std::size_t count = full.rows.size() - offset;
  if (query.limit) count = std::min(count, *query.limit);
  count = std::min(count, max_answers_);
  out.rows.assign(full.rows.begin() + static_cast<std::ptrdiff_t>(offset),
                  full.rows.begin() + static_cast<std::ptrdiff_t>(offset + count));
  return out;
}

// ---------------------------------------------------------------------------
// SPARQL JSON results

namespace {

Term json_term(const json& b) {
  const std::string type = b.at("type").get<std::string>();
  const std::string value = b.at("value").get<std::string>();
  if (type == "uri") return Term::iri(value);
  if (type == "bnode") return Term::iri("urn:bnode:" + value);
  if (type == "literal" || type == "typed-literal") {
    if (b.contains("xml:lang")) return Term::lang_literal(value, b["xml:lang"].get<std::string>());
    if (b.contains("datatype")) return Term::typed_literal(value, b["datatype"].get<std::string>());
    return Term::literal(value);
  }
  throw TransportError("unknown binding type '" + type + "'");
}

json term_json(const Term& t) {
  json j;
  if (t.is_iri()) {
    j["type"] = "uri";
    j["value"] = t.iri_value();
    return j;
  }
  j["type"] = "literal";
  j["value"] = t.lexical();
  const std::string lang = t.lang();
  if (!lang.empty()) {
    j["xml:lang"] = lang;
  } else if (t.datatype() != kXsdString) {
    j["datatype"] = t.datatype();
  }
  return j;
}

struct Url {
  std::string origin;  // scheme://host:port
  std::string path;
};

Url split_url(const std::string& endpoint) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) throw TransportError("invalid endpoint URL '" + endpoint + "'");
  const auto slash = endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

}  // namespace

ResultSet parse_sparql_json(const std::string& payload) {
  ResultSet out;
  try {
    const json doc = json::parse(payload);
    for (const auto& v : doc.at("head").at("vars")) out.variables.push_back({v.get<std::string>()});
    for (const auto& b : doc.at("results").at("bindings")) {
      std::vector<Term> row;
      row.reserve(out.variables.size());
      for (const auto& v : out.variables) {
        if (!b.contains(v.name)) {
          throw TransportError("binding without value for ?" + v.name);
        }
        row.push_back(json_term(b.at(v.name)));
      }
      out.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed SPARQL results: ") + e.what());
  }
  return out;
}

std::string to_sparql_json(const ResultSet& result) {
  json doc;
  json vars = json::array();
  for (const auto& v : result.variables) vars.push_back(v.name);
  doc["head"]["vars"] = std::move(vars);
  json bindings = json::array();
  for (const auto& row : result.rows) {
    json b = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) b[result.variables[i].name] = term_json(row[i]);
    bindings.push_back(std::move(b));
  }
  doc["results"]["bindings"] = std::move(bindings);
  return doc.dump();
}

// ---------------------------------------------------------------------------
// Remote

ResultSet remote_execute(const std::string& endpoint, const std::string& sparql_text,
                         std::chrono::milliseconds timeout) {
  const Url url = split_url(endpoint);
  httplib::Client client(url.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  const httplib::Headers headers{{"Accept", "application/sparql-results+json"}};

  httplib::Result res;
  if (RemoteSource::uses_post(sparql_text)) {
    // Direct body: form-encoded bodies are size-capped by many servers.
    res = client.Post(url.path, headers, sparql_text, "application/sparql-query");
  } else {
    res = client.Get(url.path, httplib::Params{{"query", sparql_text}}, headers);
  }
  if (!res) {
    throw TransportError("request to " + endpoint + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status >= 400) {
    throw TransportError("endpoint returned HTTP " + std::to_string(res->status), res->status);
  }
  return parse_sparql_json(res->body);
}

RemoteSource::RemoteSource(std::string endpoint, RemoteOptions options)
    : endpoint_(std::move(endpoint)), options_(options) {
  split_url(endpoint_);
}

ResultSet RemoteSource::do_evaluate(const SelectQuery& query) {
  ResultSet r = remote_execute(endpoint_, serialize(query), options_.timeout);
  if (r.variables != query.projected) {
    throw TransportError("result variables do not match the projection");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Paging

void evaluate_all_pages(GraphSource& source, const QueryPlan& plan, const PageCallback& on_page,
                        bool paging, PageCursor start) {
  const std::size_t page = std::max<std::size_t>(1, std::min(plan.page_size, source.max_answers()));
  for (std::size_t part = start.part; part < plan.parts.size(); ++part) {
    SelectQuery q = plan.parts[part];
    if (!paging) {
      q.limit.reset();
      q.offset.reset();
      try {
        on_page(source.evaluate(q));
      } catch (const StreamAborted&) {
        throw;
      } catch (const TransportError& e) {
        throw StreamAborted(e, PageCursor{part, 0});
      }
      continue;
    }
    std::size_t offset = part == start.part ? start.offset : 0;
    while (true) {
      q.limit = page;
      q.offset = offset;
      ResultSet rows;
      try {
        rows = source.evaluate(q);
      } catch (const StreamAborted&) {
        throw;
      } catch (const TransportError& e) {
        throw StreamAborted(e, PageCursor{part, offset});
      }
      const bool last = rows.rows.size() < page;
      on_page(rows);
      if (last) break;
      offset += page;
    }
  }
}

// ---------------------------------------------------------------------------
// Stub endpoint

struct StubEndpoint::Impl {
  std::shared_ptr<const Graph> graph;
  std::size_t max_answers;
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> failure{0};
  mutable std::mutex mu;
  std::string last_method;

  void handle(const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard lock(mu);
      last_method = req.method;
    }
    if (const int f = failure.load()) {
      res.status = f;
      res.set_content("injected failure", "text/plain");
      return;
    }
    std::string text;
    if (req.has_param("query")) {
      text = req.get_param_value("query");
    } else if (req.method == "POST" && req.get_header_value("Content-Type") == "application/sparql-query") {
      text = req.body;
    } else {
      res.status = 400;
      res.set_content("missing query parameter", "text/plain");
      return;
    }
    try {
      const SelectQuery q = parse_select(text);
      EmbeddedSource source(graph, max_answers);
      res.set_content(to_sparql_json(source.evaluate(q)), "application/sparql-results+json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(e.what(), "text/plain");
    }
  }
};

StubEndpoint::StubEndpoint(std::shared_ptr<const Graph> graph, std::size_t max_answers)
    : impl_(std::make_unique<Impl>()) {
  impl_->graph = std::move(graph);
  impl_->max_answers = max_answers;
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    impl_->handle(req, res);
  };
  impl_->server.Get("/sparql", handler);
  impl_->server.Post("/sparql", handler);
}

StubEndpoint::~StubEndpoint() { stop(); }

int StubEndpoint::start(int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    if (!impl_->server.bind_to_port("127.0.0.1", port)) throw Error("cannot bind port");
    impl_->port = port;
  }
  if (impl_->port < 0) throw Error("cannot bind stub endpoint");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void StubEndpoint::listen_blocking(const std::string& host, int port) {
  impl_->port = port;
  if (!impl_->server.listen(host, port)) throw Error("cannot listen on " + host);
}

void StubEndpoint::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string StubEndpoint::url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port) + "/sparql";
}

void StubEndpoint::set_failure_status(int status) { impl_->failure = status; }

std::string StubEndpoint::last_method() const {
  std::lock_guard lock(impl_->mu);
  return impl_->last_method;
}

}  // namespace travshacl
