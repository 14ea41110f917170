#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ctgraph {

struct CheckResult {
  std::string name;
  bool passed = false;
  double margin = 0.0;   // slack of the tested inequality at the worst sample
  std::string witness;   // worst-case sample description
  std::uint64_t seed = 0;
};

struct TheoryConfig {
  std::uint64_t seed = 1;
  int small_side = 16;    // sampling checks
  int desk_side = 64;     // sweep checks
  int desk_angles = 30;
  double sigma = 0.5;     // graph width for the bound checks
  int radius = 1;
  bool include_sweeps = true;  // convergence/stability sweeps are the slow part
};

// Numeric verification battery: pattern invariance, projector positivity and
// Laplacian kernel, node-measure Lipschitz bound, Laplacian-difference bound
// with the closed-form constant, the two-problem objective inequality, the
// Tikhonov spectral bound, convergence and stability sweeps, coercivity rays.
// Failures are data, not exceptions.
std::vector<CheckResult> run_all(const TheoryConfig& config);

// Feeds deliberately corrupted structures (asymmetric weights, mismatched
// patterns) through the same validators and reports whether they were caught.
std::vector<CheckResult> self_test(std::uint64_t seed);

std::string to_json(const std::vector<CheckResult>& results);
bool all_passed(const std::vector<CheckResult>& results);

}  // namespace ctgraph
