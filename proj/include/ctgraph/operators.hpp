#pragma once

#include <Eigen/SparseCore>

namespace ctgraph {

// Minimal mat-vec interface shared by the regularization operators fed to the
// variational solver (graph Laplacian, discrete gradient, zero operator).
struct LinearOperator {
  virtual ~LinearOperator() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual Eigen::VectorXd apply(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd apply_t(const Eigen::VectorXd& y) const = 0;
};

class SparseOperator : public LinearOperator {
 public:
  explicit SparseOperator(Eigen::SparseMatrix<double> A) : A_(std::move(A)) {}
  Eigen::Index rows() const override { return A_.rows(); }
  Eigen::Index cols() const override { return A_.cols(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override { return A_ * x; }
  Eigen::VectorXd apply_t(const Eigen::VectorXd& y) const override { return A_.transpose() * y; }
  const Eigen::SparseMatrix<double>& matrix() const { return A_; }

 private:
  Eigen::SparseMatrix<double> A_;
};

// Forward-difference gradient on an h x w grid, stacked [d/dcol; d/drow],
// zero rows at the far boundary (Neumann). Shape 2n x n.
Eigen::SparseMatrix<double> gradient_operator(int height, int width);

}  // namespace ctgraph
