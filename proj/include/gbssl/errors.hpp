#pragma once

#include <stdexcept>
#include <string>

namespace gbssl {

// Error taxonomy. The CLI maps kinds to exit codes:
//   config/domain/dimension -> 2, numerical/solver/structure/alignment -> 3,
//   resource -> 4.
enum class ErrorKind {
  Config,
  Domain,
  Dimension,
  Numerical,
  Solver,
  Structure,
  Alignment,
  Resource,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::Config, w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::Domain, w) {}
};
struct DimensionError : Error {
  explicit DimensionError(const std::string& w) : Error(ErrorKind::Dimension, w) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error(ErrorKind::Numerical, w) {}
};
struct SolverError : Error {
  explicit SolverError(const std::string& w) : Error(ErrorKind::Solver, w) {}
};
struct StructureError : Error {
  explicit StructureError(const std::string& w) : Error(ErrorKind::Structure, w) {}
};
struct AlignmentError : Error {
  explicit AlignmentError(const std::string& w) : Error(ErrorKind::Alignment, w) {}
};
struct ResourceError : Error {
  explicit ResourceError(const std::string& w) : Error(ErrorKind::Resource, w) {}
};

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::Domain:
    case ErrorKind::Dimension:
      return 2;
    case ErrorKind::Resource:
      return 4;
    default:
      return 3;
  }
}

}  // namespace gbssl
