#pragma once

#include <Eigen/Dense>

namespace ctgraph {

// H x W scalar field with values nominally in [0,1], vectorized
// lexicographically: pixel (r, c) lives at index r * width + c.
struct ImageGrid {
  int height = 0;
  int width = 0;
  Eigen::VectorXd values;

  ImageGrid() = default;
  ImageGrid(int h, int w) : height(h), width(w), values(Eigen::VectorXd::Zero(Eigen::Index(h) * w)) {}
  ImageGrid(int h, int w, Eigen::VectorXd v) : height(h), width(w), values(std::move(v)) {}

  Eigen::Index size() const { return Eigen::Index(height) * width; }
  double& at(int r, int c) { return values[Eigen::Index(r) * width + c]; }
  double at(int r, int c) const { return values[Eigen::Index(r) * width + c]; }

  ImageGrid clipped() const {
    ImageGrid out(height, width);
    out.values = values.cwiseMax(0.0).cwiseMin(1.0);
    return out;
  }
};

}  // namespace ctgraph
