#include "ctgraph/operators.hpp"

#include <vector>

namespace ctgraph {

Eigen::SparseMatrix<double> gradient_operator(int height, int width) {
  const Eigen::Index n = Eigen::Index(height) * width;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(std::size_t(4 * n));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int p = r * width + c;
      if (c + 1 < width) {  // horizontal difference; zero row at the boundary
        trips.emplace_back(p, p, -1.0);
        trips.emplace_back(p, p + 1, 1.0);
      }
      if (r + 1 < height) {  // vertical difference, stacked below
        trips.emplace_back(int(n) + p, p, -1.0);
        trips.emplace_back(int(n) + p, p + width, 1.0);
      }
    }
  }
  Eigen::SparseMatrix<double> L(2 * n, n);
  L.setFromTriplets(trips.begin(), trips.end());
  L.makeCompressed();
  return L;
}

}  // namespace ctgraph
