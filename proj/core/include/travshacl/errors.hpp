#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace travshacl {

// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. `position` is a byte offset for schema/query text and
// a 1-based line number for N-Triples.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t position)
      : Error(what + " (at " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class DanglingReferenceError : public SchemaError {
 public:
  explicit DanglingReferenceError(std::string name)
      : SchemaError("reference to undeclared shape '" + name + "'"),
        name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class NegativeCycleError : public SchemaError {
 public:
  explicit NegativeCycleError(std::vector<std::string> cycle)
      : SchemaError(describe(cycle)), cycle_(std::move(cycle)) {}
  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  static std::string describe(const std::vector<std::string>& cycle) {
    std::string out = "negation through recursion among shapes {";
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      if (i) out += ", ";
      out += cycle[i];
    }
    return out + "}";
  }
  std::vector<std::string> cycle_;
};

class PlanningError : public Error {
 public:
  using Error::Error;
};

class QueryError : public Error {
 public:
  using Error::Error;
};

// Failure talking to a SPARQL endpoint. `status` is the HTTP status or 0 when
// no response was received.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int status = 0)
      : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace travshacl
