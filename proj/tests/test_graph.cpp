#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "ctgraph/errors.hpp"
#include "ctgraph/graph.hpp"
#include "ctgraph/rng.hpp"
#include "oracles.hpp"

using namespace ctgraph;

namespace {

ImageGrid random_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  return ImageGrid(h, w, rng.uniform_vector(Eigen::Index(h) * w));
}

}  // namespace

TEST_CASE("constant image: all in-radius weights are exactly one") {
  ImageGrid x(4, 4, Eigen::VectorXd::Constant(16, 0.37));
  GraphParams p;  // R = 1, linf
  const ImageGraph g = build_graph(x, p);
  // 4 corners with 3 neighbors, 8 border pixels with 5, 4 interior with 8.
  const int directed_edges = 4 * 3 + 8 * 5 + 4 * 8;
  CHECK(g.weights.nonZeros() == directed_edges);
  for (int k = 0; k < g.weights.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(g.weights, k); it; ++it)
      CHECK(it.value() == 1.0);
  CHECK(g.mu == doctest::Approx(std::sqrt(double(directed_edges))).epsilon(1e-14));
}

TEST_CASE("three-pixel path: weights, node measure, and Laplacian by hand") {
  ImageGrid x(1, 3);
  x.at(0, 2) = 1.0;
  GraphParams p;
  p.R = 1;
  p.sigma = 1.0;
  const ImageGraph g = build_graph(x, p);

  CHECK(g.weights.coeff(0, 1) == 1.0);
  CHECK(g.weights.coeff(1, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(g.weights.coeff(0, 2) == 0.0);  // distance 2 exceeds R
  const double mu = std::sqrt(2.0 * (1.0 + std::exp(-2.0)));
  CHECK(g.mu == doctest::Approx(mu).epsilon(1e-14));

  const GraphLaplacianOp lap(g);
  const Eigen::VectorXd d = lap.apply(x.values);
  CHECK(d[0] == 0.0);  // equal neighbors contribute exact zeros
  CHECK(d[1] == doctest::Approx(-std::exp(-1.0) / mu).epsilon(1e-14));
  CHECK(d[2] == doctest::Approx(std::exp(-1.0) / mu).epsilon(1e-14));
}

TEST_CASE("graph and Laplacian match the dense reference") {
  const ImageGrid x = random_image(6, 6, 11);
  GraphParams p;
  p.R = 2;
  p.sigma = 0.3;
  const ImageGraph g = build_graph(x, p);
  const auto ref = oracles::dense_graph(x, p);

  CHECK((Eigen::MatrixXd(g.weights) - ref.W).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(g.mu - ref.mu) < 1e-12 * ref.mu);

  const GraphLaplacianOp lap(g);
  CHECK((Eigen::MatrixXd(lap.matrix()) - ref.laplacian).cwiseAbs().maxCoeff() < 1e-13);

  Rng rng(5);
  const Eigen::VectorXd v = rng.normal_vector(x.size());
  CHECK((lap.apply(v) - ref.laplacian * v).cwiseAbs().maxCoeff() < 1e-12);
  // Self-adjoint: <Lap a, b> == <a, Lap b>.
  const Eigen::VectorXd w = rng.normal_vector(x.size());
  CHECK(lap.apply(v).dot(w) == doctest::Approx(v.dot(lap.apply(w))).epsilon(1e-12));
}

TEST_CASE("constants are annihilated exactly, not just approximately") {
  const ImageGrid x = random_image(9, 7, 3);
  GraphParams p;
  p.R = 2;
  p.sigma = 0.15;
  const GraphLaplacianOp lap(build_graph(x, p));
  const Eigen::VectorXd d = lap.apply(Eigen::VectorXd::Constant(x.size(), 0.8125));
  CHECK(d.cwiseAbs().maxCoeff() == 0.0);
  // The materialized matrix keeps row sums at rounding level.
  const Eigen::VectorXd rs = lap.matrix() * Eigen::VectorXd::Ones(x.size());
  CHECK(rs.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sparsity pattern depends only on shape and parameters") {
  GraphParams p;
  p.R = 1;
  p.sigma = 0.05;
  const ImageGraph a = build_graph(random_image(8, 8, 1), p);
  const ImageGraph b = build_graph(random_image(8, 8, 2), p);
  CHECK(a.pattern_hash == b.pattern_hash);
  CHECK(a.weights.nonZeros() == b.weights.nonZeros());

  GraphParams p2 = p;
  p2.R = 2;
  const ImageGraph c = build_graph(random_image(8, 8, 1), p2);
  CHECK(a.pattern_hash != c.pattern_hash);

  GraphParams p3 = p;
  p3.distance_norm = DistanceNorm::l1;
  const ImageGraph d = build_graph(random_image(8, 8, 1), p3);
  CHECK(a.pattern_hash != d.pattern_hash);
}

TEST_CASE("taxicab and Chebyshev neighborhoods have the expected edge counts") {
  const ImageGrid x = random_image(3, 3, 4);
  GraphParams p;
  p.R = 1;
  p.sigma = 10.0;
  const ImageGraph inf_graph = build_graph(x, p);
  p.distance_norm = DistanceNorm::l1;
  const ImageGraph one_graph = build_graph(x, p);
  CHECK(inf_graph.weights.nonZeros() == 40);  // 20 undirected edges with diagonals
  CHECK(one_graph.weights.nonZeros() == 24);  // 12 without
}

TEST_CASE("underflowed-but-stored weights keep the pattern; total underflow throws") {
  // sigma small enough that some weights flush to zero but equal neighbors
  // still contribute exact ones: the pattern must not shrink.
  ImageGrid x(1, 3);
  x.at(0, 2) = 1.0;
  GraphParams p;
  p.sigma = 1e-200;
  const ImageGraph g = build_graph(x, p);
  CHECK(g.weights.coeff(1, 2) == 0.0);
  CHECK(g.weights.nonZeros() == 4);  // both stored directions of both edges

  // A strictly increasing ramp underflows everywhere.
  ImageGrid ramp(8, 8);
  for (Eigen::Index i = 0; i < ramp.size(); ++i) ramp.values[i] = double(i) / ramp.size();
  CHECK_THROWS_AS((void)build_graph(ramp, p), DegenerateGraphError);
}

TEST_CASE("parameter validation") {
  const ImageGrid x = random_image(4, 4, 1);
  GraphParams p;
  p.R = 0;
  CHECK_THROWS_AS((void)build_graph(x, p), ConfigError);
  p.R = 1;
  p.sigma = 0.0;
  CHECK_THROWS_AS((void)build_graph(x, p), ConfigError);
  ImageGrid bad = x;
  bad.values[0] = std::numeric_limits<double>::quiet_NaN();
  p.sigma = 1.0;
  CHECK_THROWS_AS((void)build_graph(bad, p), ConfigError);
}

TEST_CASE("grid graphs are connected; labels follow the pattern only") {
  GraphParams p;
  const ImageGraph a = build_graph(random_image(5, 7, 1), p);
  const auto la = connected_components(a);
  CHECK(count_components(la) == 1);
  for (int label : la) CHECK(label == 0);

  const ImageGraph b = build_graph(random_image(5, 7, 99), p);
  CHECK(connected_components(b) == la);

  // A hand-built graph with no edges splits into singletons.
  ImageGraph isolated;
  isolated.height = 1;
  isolated.width = 3;
  isolated.n = 3;
  isolated.weights = Eigen::SparseMatrix<double>(3, 3);
  const auto li = connected_components(isolated);
  CHECK(count_components(li) == 3);
  CHECK(li == std::vector<int>({0, 1, 2}));
}

TEST_CASE("smoothness constants: closed forms against the numeric maximizer") {
  for (double sigma : {0.25, 0.5, 1.0, 2.0}) {
    GraphParams p;
    p.R = 1;
    p.sigma = sigma;
    const auto lc = lipschitz_constants(p, 64);
    CHECK(lc.L_prime == doctest::Approx(std::sqrt(2.0 / std::exp(1.0)) / sigma).epsilon(1e-14));
    CHECK(lc.L_prime == doctest::Approx(oracles::max_abs_weight_derivative(sigma)).epsilon(1e-9));
  }

  GraphParams p;
  p.R = 5;
  p.sigma = 1.0;
  const auto lc = lipschitz_constants(p, 256);
  CHECK(lc.kappa_bar == 121.0);  // (2R+1)^2
  CHECK(lc.L_doubleprime ==
        doctest::Approx(2.0 * lc.L_prime * lc.kappa_bar * std::sqrt(256.0)).epsilon(1e-14));
  CHECK(lc.usable);
}

TEST_CASE("difference-bound constant decreases with image size and degrades gracefully") {
  GraphParams p;
  p.R = 1;
  p.sigma = 0.5;
  double prev = std::numeric_limits<double>::infinity();
  for (Eigen::Index n : {64, 256, 1024, 4096}) {
    const auto lc = lipschitz_constants(p, n);
    REQUIRE(lc.usable);
    CHECK(lc.c_bound > 0.0);
    CHECK(lc.c_bound <= prev);
    prev = lc.c_bound;
  }

  p.sigma = 1e-3;  // exp(-2/sigma^2) underflows
  const auto lc = lipschitz_constants(p, 64);
  CHECK_FALSE(lc.usable);
}

TEST_CASE("matrix market export writes a parsable coordinate file") {
  const ImageGrid x = random_image(4, 4, 8);
  const ImageGraph g = build_graph(x, GraphParams{});
  const std::string path = "mm_export_test.mtx";
  write_matrix_market(g.weights, path);

  std::ifstream f(path);
  REQUIRE(bool(f));
  std::string header;
  std::getline(f, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real general");
  Eigen::Index rows = 0, cols = 0, nnz = 0;
  f >> rows >> cols >> nnz;
  CHECK(rows == g.weights.rows());
  CHECK(cols == g.weights.cols());
  CHECK(nnz == g.weights.nonZeros());
  Eigen::Index r = 0, c = 0;
  double v = 0.0;
  REQUIRE(bool(f >> r >> c >> v));
  CHECK(r >= 1);  // 1-based indices
  CHECK(c >= 1);
  f.close();
  std::remove(path.c_str());
}
