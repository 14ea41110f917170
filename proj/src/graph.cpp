#include "ctgraph/graph.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <vector>

#include "ctgraph/errors.hpp"
#include "ctgraph/io.hpp"

namespace ctgraph {

namespace {

// FNV-1a over the stored (p,q) pairs in canonical (column-sorted) order; a
// pure function of the sparsity-pattern set.
std::uint64_t hash_pattern(const Eigen::SparseMatrix<double>& W) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (int k = 0; k < W.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(W, k); it; ++it) {
      mix(std::uint64_t(it.row()));
      mix(std::uint64_t(it.col()));
    }
  }
  return h;
}

}  // namespace

ImageGraph build_graph(const ImageGrid& x, const GraphParams& params) {
  if (params.R < 1) throw ConfigError("graph radius must be at least 1");
  if (!(params.sigma > 0.0)) throw ConfigError("graph sigma must be positive");
  if (!x.values.allFinite()) throw ConfigError("image values must be finite");

  const int h = x.height, w = x.width, R = params.R;
  const Eigen::Index n = x.size();

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(std::size_t(n) * (2 * R + 1) * (2 * R + 1));
  double sumsq = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Eigen::Index p = Eigen::Index(r) * w + c;
      for (int dr = -R; dr <= R; ++dr) {
        for (int dc = -R; dc <= R; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (params.distance_norm == DistanceNorm::l1 && std::abs(dr) + std::abs(dc) > R)
            continue;
          const int r2 = r + dr, c2 = c + dc;
          if (r2 < 0 || r2 >= h || c2 < 0 || c2 >= w) continue;
          const Eigen::Index q = Eigen::Index(r2) * w + c2;
          // Scale before squaring: equal pixels give exactly exp(0) = 1 even
          // when sigma^2 itself underflows, and overflow of t^2 decays to 0.
          const double t = (x.values[p] - x.values[q]) / params.sigma;
          const double wv = std::exp(-t * t);
          trips.emplace_back(int(p), int(q), wv);
          sumsq += wv * wv;
        }
      }
    }
  }

  ImageGraph g;
  g.height = h;
  g.width = w;
  g.n = n;
  g.params = params;
  g.weights.resize(n, n);
  g.weights.setFromTriplets(trips.begin(), trips.end());
  g.weights.makeCompressed();
  g.mu = std::sqrt(sumsq);
  if (!(g.mu > 0.0))
    throw DegenerateGraphError("all edge weights underflowed to zero; node measure vanishes");
  g.pattern_hash = hash_pattern(g.weights);
  return g;
}

GraphLaplacianOp::GraphLaplacianOp(const ImageGraph& g)
    : n_(g.n), mu_(g.mu), weights_(g.weights) {
  if (!(mu_ > 0.0)) throw DegenerateGraphError("node measure must be positive");
}

Eigen::VectorXd GraphLaplacianOp::apply(const Eigen::VectorXd& x) const {
  // Definitional sum: every term carries the factor (x(p) - x(q)), so a
  // constant vector maps to exactly zero. Column p of the symmetric weight
  // matrix enumerates the neighbors of p.
  Eigen::VectorXd out(n_);
  const double inv_mu = 1.0 / mu_;
  for (Eigen::Index p = 0; p < n_; ++p) {
    double acc = 0.0;
    const double xp = x[p];
    for (Eigen::SparseMatrix<double>::InnerIterator it(weights_, p); it; ++it)
      acc += it.value() * (xp - x[it.row()]);
    out[p] = inv_mu * acc;
  }
  return out;
}

Eigen::SparseMatrix<double> GraphLaplacianOp::matrix() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(std::size_t(weights_.nonZeros()) + std::size_t(n_));
  const double inv_mu = 1.0 / mu_;
  for (int k = 0; k < weights_.outerSize(); ++k) {
    double colsum = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(weights_, k); it; ++it) {
      trips.emplace_back(int(it.row()), k, -inv_mu * it.value());
      colsum += it.value();
    }
    trips.emplace_back(k, k, inv_mu * colsum);
  }
  Eigen::SparseMatrix<double> A(n_, n_);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

GraphLaplacianOp laplacian(const ImageGraph& g) { return GraphLaplacianOp(g); }

std::vector<int> connected_components(const ImageGraph& g) {
  std::vector<int> parent(std::size_t(g.n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  for (int k = 0; k < g.weights.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(g.weights, k); it; ++it) {
      const int a = find(int(it.row())), b = find(k);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<int> label(std::size_t(g.n));
  for (Eigen::Index i = 0; i < g.n; ++i) label[i] = find(int(i));
  return label;
}

int count_components(const std::vector<int>& labels) {
  int count = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == int(i)) ++count;
  return count;
}

LipschitzConstants lipschitz_constants(const GraphParams& params, Eigen::Index n) {
  if (params.R < 1 || !(params.sigma > 0.0)) throw ConfigError("invalid graph parameters");
  LipschitzConstants k;
  k.L_prime = std::sqrt(2.0 / std::numbers::e) / params.sigma;
  k.kappa_bar = double(2 * params.R + 1) * (2 * params.R + 1);
  k.L_doubleprime = 2.0 * k.L_prime * k.kappa_bar * std::sqrt(double(n));
  const double floor_w = std::exp(-2.0 / (params.sigma * params.sigma));
  if (floor_w > 0.0) {
    k.c_bound = 2.0 * k.kappa_bar * (2.0 * double(n) * k.L_prime + k.L_doubleprime) /
                (double(n) * double(n) * floor_w);
    k.usable = std::isfinite(k.c_bound);
  }
  return k;
}

void write_matrix_market(const Eigen::SparseMatrix<double>& A, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << "%%MatrixMarket matrix coordinate real general\n";
  f << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      f << (it.row() + 1) << " " << (it.col() + 1) << " " << format_double(it.value()) << "\n";
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace ctgraph
