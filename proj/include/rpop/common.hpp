#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace rpop {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when a case file cannot be parsed, fails the schema, or violates a
/// data invariant. `element` and `field` name the offending piece of input.
class CaseError : public std::runtime_error {
public:
  enum class Kind { Parse, Schema, Invariant };

  CaseError(Kind k, std::string element, std::string field, const std::string& message)
      : std::runtime_error(message), kind(k), element(std::move(element)), field(std::move(field)) {}

  Kind kind;
  std::string element;
  std::string field;
};

/// Raised on internal solver failures (numerical breakdown, node limits).
class SolveError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Runs body(i) for i in [0, n) across at most num_threads workers with a
/// static block partition. num_threads <= 1 runs inline. Exceptions from
/// workers are rethrown on the calling thread.
void parallel_for(int n, int num_threads, const std::function<void(int)>& body);

/// Hardware thread count clamped to [1, 64].
int default_thread_count();

}  // namespace rpop
