#pragma once

#include <stdexcept>
#include <string>

namespace ctgraph {

// Invalid user-supplied configuration (bad geometry fields, bad solver knobs,
// malformed config files). CLI maps this family to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryError : ConfigError {
  using ConfigError::ConfigError;
};

// Failures while executing a pipeline stage (I/O, solver breakdown).
// CLI maps this family to exit code 3.
struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : StageError {
  using StageError::StageError;
};

struct SolverError : StageError {
  using StageError::StageError;
};

// sigma so small that every edge weight underflows to zero: the node measure
// would vanish and the Laplacian is undefined.
struct DegenerateGraphError : StageError {
  using StageError::StageError;
};

// Discrepancy target not reachable: the residual at the smallest admissible
// regularization parameter already exceeds tau * noise_norm.
struct InfeasibleDiscrepancyError : SolverError {
  using SolverError::SolverError;
};

}  // namespace ctgraph
