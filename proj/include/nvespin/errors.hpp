#pragma once

#include <stdexcept>
#include <string>

namespace nvespin {

// Hilbert space would exceed the configured dimension cap.
struct DimensionCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input matrix fails the Hermiticity tolerance.
struct NotHermitianError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Eigensolver or fitter failed to converge within its iteration cap.
struct NonConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An electron eigenvector has less than the required weight in a single
// laboratory-frame m_S basis state (strong-mixing regime).
struct AmbiguousManifoldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyAfterDeadTimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoLarmorAnchorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidRegimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RankDeficientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnderDeterminedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MinimumNotBracketedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Configuration file problems; carries the offending key in the message.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input data file; carries a 1-based line number.
struct DataFormatError : std::runtime_error {
  DataFormatError(const std::string& msg, long line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"),
        line_number(line) {}
  long line_number;
};

}  // namespace nvespin
