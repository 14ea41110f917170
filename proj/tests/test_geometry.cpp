#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ctgraph/errors.hpp"
#include "ctgraph/geometry.hpp"
#include "ctgraph/rng.hpp"
#include "oracles.hpp"

using namespace ctgraph;

namespace {

ScanGeometry parallel_geometry(int side, int n_angles, int n_detector = 0) {
  ScanGeometry g;
  g.image_side = side;
  g.n_angles = n_angles;
  g.n_detector = n_detector;
  g.finalize();
  return g;
}

}  // namespace

TEST_CASE("single pixel, single central ray: weight is the pixel side") {
  ScanGeometry g;
  g.image_side = 1;
  g.n_angles = 1;
  g.angles_deg = {0.0};
  g.n_detector = 1;
  g.finalize();
  auto K = build_projector(g);
  REQUIRE(K.rows() == 1);
  REQUIRE(K.cols() == 1);
  CHECK(K.matrix.coeff(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("4x4 with axis-aligned angles matches the dense reference entry by entry") {
  ScanGeometry g;
  g.image_side = 4;
  g.n_angles = 2;
  g.angles_deg = {0.0, 90.0};
  g.n_detector = 4;
  g.detector_spacing = 1.0;
  g.finalize();
  auto K = build_projector(g);
  const Eigen::MatrixXd ref = oracles::dense_projector(g);
  REQUIRE(K.rows() == ref.rows());
  CHECK((Eigen::MatrixXd(K.matrix) - ref).cwiseAbs().maxCoeff() < 1e-12);
  // Every ray crosses the full image through a line of pixels.
  for (Eigen::Index i = 0; i < K.rows(); ++i)
    CHECK(Eigen::MatrixXd(K.matrix).row(i).sum() == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("parallel projector at generic angles matches the dense reference") {
  auto g = parallel_geometry(8, 10);
  auto K = build_projector(g);
  const Eigen::MatrixXd ref = oracles::dense_projector(g);
  REQUIRE(K.rows() == ref.rows());
  REQUIRE(K.cols() == ref.cols());
  CHECK((Eigen::MatrixXd(K.matrix) - ref).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fan projector matches the dense reference") {
  ScanGeometry g;
  g.mode = BeamMode::fan;
  g.image_side = 8;
  g.n_angles = 6;
  g.finalize();
  auto K = build_projector(g);
  const Eigen::MatrixXd ref = oracles::dense_projector(g);
  CHECK((Eigen::MatrixXd(K.matrix) - ref).cwiseAbs().maxCoeff() < 1e-10);
  // A fan ray aimed at the image must hit it.
  CHECK(Eigen::MatrixXd(K.matrix).cwiseAbs().rowwise().sum().maxCoeff() > 0.0);
}

TEST_CASE("row and column counts follow the geometry defaults") {
  auto g = parallel_geometry(256, 60);
  CHECK(g.n_detector == 362);  // floor(sqrt(2 * 256^2))
  auto K = build_projector(g);
  CHECK(K.rows() == 21720);
  CHECK(K.cols() == 65536);
}

TEST_CASE("projection of the constant-one image gives intersection lengths") {
  auto g = parallel_geometry(8, 10);
  auto K = build_projector(g);
  ImageGrid ones(8, 8, Eigen::VectorXd::Ones(64));
  const Sinogram y = apply(K, ones);
  const Eigen::VectorXd ref = oracles::dense_projector(g).rowwise().sum();
  CHECK((y.values - ref).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(y.values.minCoeff() >= 0.0);
  CHECK(y.values.norm() > 0.0);
  // Rows the reference says are hit must be hit by the library too.
  for (Eigen::Index i = 0; i < y.values.size(); ++i)
    if (ref[i] > 1e-12) CHECK(y.values[i] > 0.0);
}

TEST_CASE("apply_adjoint is the exact transpose of apply") {
  auto g = parallel_geometry(8, 10);
  auto K = build_projector(g);
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd x = rng.normal_vector(K.cols());
    const Eigen::VectorXd s = rng.normal_vector(K.rows());
    const double lhs = apply_vec(K, x).dot(s);
    const double rhs = x.dot(apply_adjoint_vec(K, s));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * x.norm() * s.norm());
  }
}

TEST_CASE("zero image projects to zero") {
  auto g = parallel_geometry(8, 5);
  auto K = build_projector(g);
  const Sinogram y = apply(K, ImageGrid(8, 8));
  CHECK(y.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dimension mismatches are rejected") {
  auto g = parallel_geometry(8, 5);
  auto K = build_projector(g);
  CHECK_THROWS_AS((void)apply(K, ImageGrid(4, 4)), GeometryError);
  CHECK_THROWS_AS((void)apply_vec(K, Eigen::VectorXd::Zero(10)), GeometryError);
  CHECK_THROWS_AS((void)apply_adjoint_vec(K, Eigen::VectorXd::Zero(3)), GeometryError);
}

TEST_CASE("geometry finalize validates its inputs") {
  ScanGeometry g;
  g.image_side = 0;
  g.n_angles = 4;
  CHECK_THROWS_AS(g.finalize(), GeometryError);

  g = ScanGeometry{};
  g.image_side = 8;
  g.n_angles = 0;
  CHECK_THROWS_AS(g.finalize(), GeometryError);

  g = ScanGeometry{};
  g.image_side = 8;
  g.n_angles = 2;
  g.angles_deg = {10.0, 5.0};  // not increasing
  CHECK_THROWS_AS(g.finalize(), GeometryError);

  g = ScanGeometry{};
  g.image_side = 8;
  g.n_angles = 1;
  g.angles_deg = {200.0};  // out of range
  CHECK_THROWS_AS(g.finalize(), GeometryError);

  g = ScanGeometry{};
  g.mode = BeamMode::fan;
  g.image_side = 8;
  g.n_angles = 4;
  g.source_radius = 1.0;  // inside the image
  CHECK_THROWS_AS(g.finalize(), GeometryError);
}

TEST_CASE("default angles are evenly spaced over [0, 179]") {
  auto g = parallel_geometry(8, 5);
  REQUIRE(g.angles_deg.size() == 5);
  CHECK(g.angles_deg.front() == 0.0);
  CHECK(g.angles_deg.back() == 179.0);
  CHECK(g.angles_deg[2] == doctest::Approx(89.5));
}

TEST_CASE("projector construction is deterministic") {
  auto g = parallel_geometry(16, 12);
  auto K1 = build_projector(g);
  auto K2 = build_projector(g);
  CHECK((Eigen::MatrixXd(K1.matrix) - Eigen::MatrixXd(K2.matrix)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noise injection hits the requested relative level exactly") {
  auto g = parallel_geometry(16, 12);
  auto K = build_projector(g);
  const Sinogram y = apply(K, make_phantom(PhantomKind::ellipses, 16, 3));
  REQUIRE(y.values.norm() > 0.0);

  SUBCASE("delta = 0 is the identity") {
    const Sinogram yd = add_noise(y, 0.0, 42);
    CHECK((yd.values - y.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK(yd.noise_norm == 0.0);
  }
  SUBCASE("delta = 2% scales the perturbation to exactly delta * ||y||") {
    const Sinogram yd = add_noise(y, 0.02, 42);
    const double dn = (yd.values - y.values).norm();
    CHECK(std::abs(dn - 0.02 * y.values.norm()) <= 1e-12 * y.values.norm());
    CHECK(yd.noise_norm == doctest::Approx(0.02 * y.values.norm()).epsilon(1e-14));
    CHECK(yd.noise_level == 0.02);
  }
  SUBCASE("same seed reproduces, different seed differs") {
    const Sinogram a = add_noise(y, 0.02, 42);
    const Sinogram b = add_noise(y, 0.02, 42);
    const Sinogram c = add_noise(y, 0.02, 43);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.values - c.values).cwiseAbs().maxCoeff() > 0.0);
  }
  SUBCASE("negative delta is rejected") {
    CHECK_THROWS_AS((void)add_noise(y, -0.1, 1), ConfigError);
  }
}

TEST_CASE("phantoms are deterministic, bounded, and leave the corners empty") {
  for (auto kind : {PhantomKind::ellipses, PhantomKind::shepp_logan_like}) {
    const ImageGrid a = make_phantom(kind, 32, 9);
    const ImageGrid b = make_phantom(kind, 32, 9);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.values.minCoeff() >= 0.0);
    CHECK(a.values.maxCoeff() <= 1.0);
    for (int r : {0, 1, 30, 31})
      for (int c : {0, 1, 30, 31}) CHECK(a.at(r, c) == 0.0);
  }
  const ImageGrid s1 = make_phantom(PhantomKind::ellipses, 32, 1);
  const ImageGrid s2 = make_phantom(PhantomKind::ellipses, 32, 2);
  CHECK((s1.values - s2.values).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("phantoms carry at least three distinct gray levels") {
  for (std::uint64_t seed : {1, 5, 11}) {
    const ImageGrid img = make_phantom(PhantomKind::ellipses, 32, seed);
    std::vector<double> vals(img.values.data(), img.values.data() + img.values.size());
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    CHECK(vals.size() >= 3);
  }
}

TEST_CASE("phantom rejects images smaller than 8 pixels per side") {
  CHECK_THROWS_AS((void)make_phantom(PhantomKind::ellipses, 4, 1), ConfigError);
}
