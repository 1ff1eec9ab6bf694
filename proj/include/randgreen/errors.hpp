#pragma once

#include <stdexcept>
#include <string>

namespace randgreen {

// Typed failures. Callers that sample are expected to catch and retry or
// resample; none of these abort the process.

struct ZeroVector : std::runtime_error {
  ZeroVector() : std::runtime_error("zero vector cannot be projectivized") {}
};

struct IndeterminacyHit : std::runtime_error {
  explicit IndeterminacyHit(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateFiber : std::runtime_error {
  explicit DegenerateFiber(const std::string& what) : std::runtime_error(what) {}
};

struct TrackingFailure : std::runtime_error {
  int lost_paths;
  explicit TrackingFailure(int lost)
      : std::runtime_error("homotopy lost " + std::to_string(lost) + " path(s)"),
        lost_paths(lost) {}
};

struct RejectionExhausted : std::runtime_error {
  RejectionExhausted()
      : std::runtime_error("rejection sampling exhausted (10^4 degenerate draws)") {}
};

struct DegenerateEncounter : std::runtime_error {
  int step_index;
  explicit DegenerateEncounter(int step)
      : std::runtime_error("degenerate map at sequence step " + std::to_string(step)),
        step_index(step) {}
};

struct CriticalOrbit : std::runtime_error {
  explicit CriticalOrbit(const std::string& what) : std::runtime_error(what) {}
};

struct SchemaError : std::runtime_error {
  std::vector<std::string> issues;
  explicit SchemaError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), issues(std::move(problems)) {}

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "config schema error:";
    for (const auto& s : v) out += "\n  " + s;
    return out;
  }
};

struct EmptySelection : std::runtime_error {
  EmptySelection() : std::runtime_error("no records match the plot selection") {}
};

}  // namespace randgreen
