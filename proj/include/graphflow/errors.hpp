#pragma once

#include <stdexcept>
#include <string>

namespace graphflow {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A chart point left (or never was in) the model's coordinate chart.
struct ChartViolation : Error {
  using Error::Error;
};

// A metric or Gram matrix could not be inverted.
struct SingularMetric : Error {
  using Error::Error;
};

// The symmetric eigensolver received non-finite input or failed to converge.
struct EigenFailure : Error {
  using Error::Error;
};

// A grid value moved outside the target chart during time stepping.
// Carries the flat grid index of the worst offender and the time.
struct ChartExit : Error {
  int point_index;
  double time;
  ChartExit(const std::string& msg, int idx, double t)
      : Error(msg), point_index(idx), time(t) {}
};

// A grid value became NaN or infinite during time stepping.
struct NumericalBlowup : Error {
  int point_index;
  double time;
  NumericalBlowup(const std::string& msg, int idx, double t)
      : Error(msg), point_index(idx), time(t) {}
};

// An ODE reduction left its admissible range (d <= 0, r outside (0,1)).
struct RangeViolation : Error {
  using Error::Error;
};

// An operation was called outside its stated domain of validity.
struct DomainError : Error {
  using Error::Error;
};

// Bad run configuration: unparsable text, unknown key, invalid value.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace graphflow
