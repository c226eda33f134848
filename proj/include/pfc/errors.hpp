#pragma once

#include <stdexcept>
#include <string>

namespace pfc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration or input data: files, flags, family specs, budgets.
struct ConfigError : Error {
  using Error::Error;
};

// Formula text rejected. `position` is a 0-based byte offset into the input;
// the message shows it 1-based.
struct ParseError : Error {
  std::size_t position;
  ParseError(const std::string& what, std::size_t pos)
      : Error(what + " (at position " + std::to_string(pos + 1) + ")"), position(pos) {}
};

// Violated evaluation or counting precondition: uncovered free variable,
// partition/free-variable mismatch, non-sentence where a sentence is needed.
struct EvalError : Error {
  using Error::Error;
};

// The requested enumeration would exceed the configured tuple budget.
struct BudgetError : Error {
  using Error::Error;
};

// A family-level analysis cannot proceed (too few usable members, unstable
// class structure, certification impossible).
struct AnalysisError : Error {
  using Error::Error;
};

// The q-selector failed on a single member; callers skip that member and
// record the reason instead of aborting the whole run.
struct SelectorError : Error {
  using Error::Error;
};

}  // namespace pfc
