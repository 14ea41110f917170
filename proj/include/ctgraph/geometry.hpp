#pragma once

#include <Eigen/SparseCore>

#include <cstdint>
#include <vector>

#include "ctgraph/image.hpp"

namespace ctgraph {

enum class BeamMode { parallel, fan };

// Acquisition description. The image is image_side x image_side pixels of
// unit side length, centered at the origin. Ray i of the assembled operator
// corresponds to angle index i / n_detector and detector index i % n_detector.
struct ScanGeometry {
  BeamMode mode = BeamMode::parallel;
  int image_side = 0;
  int n_angles = 0;
  std::vector<double> angles_deg;  // empty -> evenly spaced over [0, 179]
  int n_detector = 0;              // 0 -> floor(sqrt(2 n)), n = image_side^2
  double source_radius = 0.0;      // fan only; 0 -> image diagonal
  double detector_radius = 0.0;    // fan only; 0 -> image diagonal
  double detector_spacing = 0.0;   // 0 -> 1 (parallel) or fan coverage / n_detector

  // Fills defaulted fields and validates invariants; throws GeometryError.
  void finalize();
  bool finalized() const { return int(angles_deg.size()) == n_angles && n_detector > 0; }
  Eigen::Index rays() const { return Eigen::Index(n_angles) * n_detector; }
  double half_diagonal() const;
};

// Sparse discrete Radon operator; entries are exact ray-pixel intersection
// lengths from Siddon traversal. Rays that miss the image keep their
// (empty) rows so the row <-> (angle, detector) indexing stays exact.
struct ProjectorMatrix {
  ScanGeometry geometry;
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
};

struct Sinogram {
  ScanGeometry geometry;
  Eigen::VectorXd values;
  double noise_level = 0.0;  // relative delta
  double noise_norm = 0.0;   // delta * ||clean values||_2
};

ProjectorMatrix build_projector(const ScanGeometry& geom);

Sinogram apply(const ProjectorMatrix& K, const ImageGrid& x);
ImageGrid apply_adjoint(const ProjectorMatrix& K, const Sinogram& s);
Eigen::VectorXd apply_vec(const ProjectorMatrix& K, const Eigen::VectorXd& x);
Eigen::VectorXd apply_adjoint_vec(const ProjectorMatrix& K, const Eigen::VectorXd& s);

// y_delta = y + delta * ||y|| * xi / ||xi||, xi standard Gaussian from seed.
Sinogram add_noise(const Sinogram& y, double delta, std::uint64_t seed);

enum class PhantomKind { ellipses, shepp_logan_like };

// Piecewise-constant synthetic object with values in [0,1]; dark background,
// corner blocks guaranteed empty. Deterministic per (kind, side, seed).
ImageGrid make_phantom(PhantomKind kind, int side, std::uint64_t seed);

}  // namespace ctgraph
