#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctgraph/geometry.hpp"
#include "ctgraph/graph.hpp"
#include "ctgraph/metrics.hpp"
#include "ctgraph/reconstructors.hpp"
#include "ctgraph/solver.hpp"

namespace ctgraph {

struct ExperimentConfig {
  ScanGeometry geometry;

  PhantomKind phantom_kind = PhantomKind::ellipses;
  std::uint64_t phantom_seed = 1;
  std::string phantom_path;  // nonempty -> load ground truth from file instead

  double delta = 0.02;
  std::uint64_t noise_seed = 101;

  GraphParams graph;
  ReconstructorSpec psi;

  AlphaRule alpha_rule = AlphaRule::discrepancy;
  double alpha_fixed = 0.0;
  double solver_tau = 1.01;
  double smoothing_eps = 1e-4;
  int max_outer = 200;
  int basis_cap = 30;
  double solver_tol = 1e-4;

  std::string output_dir = "run";
  std::vector<double> sweep_deltas;
};

// Lossless JSON round-trip (unknown keys rejected).
std::string config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const std::string& json_text);
ExperimentConfig desk_config();  // 64x64, 30 angles, 2% noise preset

// Enum <-> string helpers shared by the config format and the CLI.
std::string to_string(BeamMode m);
BeamMode beam_mode_from_string(const std::string& s);
std::string to_string(PhantomKind k);
PhantomKind phantom_kind_from_string(const std::string& s);
std::string to_string(DistanceNorm d);
DistanceNorm distance_norm_from_string(const std::string& s);
std::string to_string(AlphaRule r);
AlphaRule alpha_rule_from_string(const std::string& s);

struct MethodResult {
  std::string method;
  ImageGrid image;
  MetricsReport metrics;
};

struct RunResult {
  ImageGrid x_gt;
  Sinogram clean;
  Sinogram noisy;
  MethodResult psi;       // preliminary reconstruction
  MethodResult graphla;   // graph-regularized reconstruction
  SolverState state;
  double psi_theta = 0.0;  // parameter chosen for the preliminary step, if any
};

// phantom -> sinogram -> noise -> psi -> graph -> l2-l1 solve -> metrics.
// When output_dir is nonempty, writes images, sinograms, metrics.csv,
// solver_trace.csv and a config.json copy into it.
RunResult run(const ExperimentConfig& config);

struct SweepRow {
  double delta;
  std::string method;
  MetricsReport metrics;
};

// One run per delta in sweep_deltas; rows for psi and graphla at each level.
// When output_dir is nonempty, writes sweep.csv.
std::vector<SweepRow> sweep(const ExperimentConfig& config);

std::string metrics_csv(const std::vector<MethodResult>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace ctgraph
