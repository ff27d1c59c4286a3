#ifndef DIPM_ERROR_HPP_
#define DIPM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dipm {

enum class ErrorKind {
  kStructural,
  kDimension,
  kLinalg,
  kDomain,
  kNetwork,
  kInnerNonConvergence,
  kLineSearch,
  kIterationCap,
  kParse,
  kInfeasibleStart,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kStructural: return "structural";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kLinalg: return "linalg";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kNetwork: return "network";
    case ErrorKind::kInnerNonConvergence: return "inner-nonconvergence";
    case ErrorKind::kLineSearch: return "line-search";
    case ErrorKind::kIterationCap: return "iteration-cap";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kInfeasibleStart: return "infeasible-start";
  }
  return "unknown";
}

// All library failures are reported through this type. `agent()` is the
// offending agent (or -1) and `index()` a kind-specific index: the uncovered
// variable, the failing pivot, the violated constraint.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, long agent = -1, long index = -1)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        message_(what),
        agent_(agent),
        index_(index) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }  // what() without the kind prefix
  long agent() const noexcept { return agent_; }
  long index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::string message_;
  long agent_;
  long index_;
};

}  // namespace dipm

#endif  // DIPM_ERROR_HPP_
