#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <string>
#include <vector>

#include "ctgraph/geometry.hpp"
#include "ctgraph/operators.hpp"

namespace ctgraph {

enum class AlphaRule { fixed, discrepancy };

// min_x 1/2 ||K x - y||^2 + alpha ||L x||_1, with the l1 term smoothed as
// sum_i sqrt(t_i^2 + eps^2) inside the solver.
struct VariationalProblem {
  const Eigen::SparseMatrix<double, Eigen::RowMajor>* K = nullptr;
  Eigen::VectorXd y;
  double noise_norm = 0.0;
  const LinearOperator* L = nullptr;

  AlphaRule alpha_rule = AlphaRule::discrepancy;
  double alpha_fixed = 0.0;  // used when alpha_rule == fixed
  double tau = 1.01;         // discrepancy safety factor, >= 1

  double smoothing_eps = 1e-4;
  int max_outer = 200;
  int basis_cap = 30;
  double tol = 1e-4;

  void validate() const;  // throws ConfigError
};

VariationalProblem make_problem(const ProjectorMatrix& K, const Sinogram& y,
                                const LinearOperator& L);

struct SolverState {
  Eigen::MatrixXd V;   // final orthonormal basis, n x k
  Eigen::VectorXd x;   // final iterate
  Eigen::VectorXd u;   // final reweighting vector
  std::vector<double> alpha_trace;
  std::vector<double> objective_trace;  // true l1 objective at the step's alpha
  std::vector<double> smoothed_trace;   // eps-smoothed objective at the step's alpha
  std::vector<double> residual_trace;   // ||K x - y||
  int restarts = 0;
  bool converged_early = false;
  int mm_violations = 0;          // majorization steps that increased the smoothed objective
  double worst_mm_violation = 0;  // largest relative increase observed
  double worst_subspace_opt = 0;  // max ||V^T r|| / ||r|| after projected solves
  double worst_orthonormality = 0;  // max ||V^T V - I||_inf across iterations
  std::string warning;

  double final_residual() const { return residual_trace.empty() ? 0.0 : residual_trace.back(); }
  double final_alpha() const { return alpha_trace.empty() ? 0.0 : alpha_trace.back(); }
};

// Majorization-minimization in a restarted generalized Krylov subspace.
// Per outer sweep: reweight, solve the projected quadratic (alpha fixed or by
// discrepancy root-finding on the projected residual), expand the basis with
// the normalized gradient, restart at basis_cap with {x, r}.
std::pair<Eigen::VectorXd, SolverState> solve(const VariationalProblem& p,
                                              const Eigen::VectorXd& x_init);

struct ObjectiveParts {
  double gamma = 0.0;     // 1/2 ||Kx-y||^2 + alpha ||Lx||_1
  double fidelity = 0.0;  // 1/2 ||Kx-y||^2
  double l1_term = 0.0;   // ||Lx||_1
  double smoothed_gamma = 0.0;
};

ObjectiveParts objective(const VariationalProblem& p, const Eigen::VectorXd& x, double alpha);
// Uses p.alpha_fixed as the weight of the l1 term.
ObjectiveParts objective(const VariationalProblem& p, const Eigen::VectorXd& x);

// Checks gamma_1(x) <= 2 gamma_2(x) + ||y1 - y2||^2 + ||(L1 - L2) x||_1 for
// two problems sharing K and alpha but differing in data and operator.
bool gamma_inequality_check(const VariationalProblem& p1, const VariationalProblem& p2,
                            const Eigen::VectorXd& x);

void write_trace_csv(const SolverState& s, const std::string& path);

}  // namespace ctgraph
