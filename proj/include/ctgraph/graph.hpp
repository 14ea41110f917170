#pragma once

#include <Eigen/SparseCore>

#include <cstdint>
#include <limits>
#include <vector>

#include "ctgraph/image.hpp"
#include "ctgraph/operators.hpp"

namespace ctgraph {

enum class DistanceNorm { linf, l1 };

struct GraphParams {
  int R = 1;              // neighborhood radius in pixels
  double sigma = 1.0;     // Gaussian width in intensity units
  DistanceNorm distance_norm = DistanceNorm::linf;
};

// Image-induced graph: w(p,q) = [0 < dist(p,q) <= R] * exp(-|x(p)-x(q)|^2 / sigma^2).
// The sparsity pattern stores every pair within radius R, including weights
// that underflow to zero, so the pattern depends only on shape and params.
// mu is the single scalar node measure ||W||_F (sum over ordered pairs).
struct ImageGraph {
  int height = 0;
  int width = 0;
  Eigen::Index n = 0;
  Eigen::SparseMatrix<double> weights;  // symmetric, zero diagonal
  double mu = 0.0;
  GraphParams params;
  std::uint64_t pattern_hash = 0;
};

ImageGraph build_graph(const ImageGrid& x, const GraphParams& params);

// Graph Laplacian: (Lap x)(p) = (1/mu) * sum_q w(p,q) (x(p) - x(q)).
// apply() evaluates that sum literally, so constants are annihilated exactly
// (each term carries the factor x(p) - x(q)). Symmetric since mu is scalar.
class GraphLaplacianOp : public LinearOperator {
 public:
  explicit GraphLaplacianOp(const ImageGraph& g);

  Eigen::Index rows() const override { return n_; }
  Eigen::Index cols() const override { return n_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd apply_t(const Eigen::VectorXd& y) const override { return apply(y); }

  double mu() const { return mu_; }
  // Materialization (D - W)/mu for export and dense spectral checks.
  Eigen::SparseMatrix<double> matrix() const;

 private:
  Eigen::Index n_ = 0;
  double mu_ = 0.0;
  Eigen::SparseMatrix<double> weights_;
};

GraphLaplacianOp laplacian(const ImageGraph& g);

// Union-find partition over the stored edge pattern (the geometric indicator;
// intensity weights are mathematically positive even when they underflow).
// Returns a label per node; labels are the smallest node index per component.
std::vector<int> connected_components(const ImageGraph& g);
int count_components(const std::vector<int>& labels);

struct LipschitzConstants {
  double L_prime = 0.0;        // sup |h'| = sqrt(2/e) / sigma
  double kappa_bar = 0.0;      // (2R+1)^2
  double L_doubleprime = 0.0;  // 2 L' kappa_bar sqrt(n)
  double c_bound = std::numeric_limits<double>::infinity();
  bool usable = false;         // false when exp(-2/sigma^2) underflows
};

LipschitzConstants lipschitz_constants(const GraphParams& params, Eigen::Index n);

// Matrix Market coordinate export of W or the assembled Laplacian.
void write_matrix_market(const Eigen::SparseMatrix<double>& A, const std::string& path);

}  // namespace ctgraph
