#pragma once

#include <string>

#include "ctgraph/geometry.hpp"
#include "ctgraph/image.hpp"

namespace ctgraph {

enum class ReconstructorKind { fbp, tikhonov, tikhonov_discrepancy, tv, external_file, ground_truth };

struct ReconstructorSpec {
  ReconstructorKind kind = ReconstructorKind::tikhonov_discrepancy;
  double theta = 1.0;        // tikhonov
  double tau = 1.01;         // discrepancy safety factor (tikhonov_discrepancy, tv)
  double fbp_cutoff = 1.0;   // fraction of the ramp kernel support kept, in (0, 1]
  std::string path;          // external_file
};

ReconstructorKind reconstructor_kind_from_string(const std::string& s);
std::string to_string(ReconstructorKind k);

// Ramp filtering of the sinogram in the detector coordinate, backprojection
// by K^T, then a least-squares scalar calibration; clipped to [0,1].
ImageGrid fbp(const Sinogram& y, const ProjectorMatrix& K, double cutoff = 1.0);

// (K^T K + theta I) x = K^T y by conjugate gradients to relative residual 1e-8.
ImageGrid tikhonov(const Sinogram& y, const ProjectorMatrix& K, double theta);

// Bisection on log(theta) until ||K x_theta - y|| lands in
// [noise_norm, tau * noise_norm]. Returns the reconstruction and theta.
std::pair<ImageGrid, double> tikhonov_discrepancy(const Sinogram& y, const ProjectorMatrix& K,
                                                  double tau = 1.01);

// l2-l1 reconstruction with the stacked forward-difference gradient as the
// regularization operator; alpha by the discrepancy principle.
ImageGrid tv(const Sinogram& y, const ProjectorMatrix& K, double tau = 1.01);

// Loads an externally produced reconstruction (16-bit PGM or PNG grayscale).
ImageGrid external_reconstruction(const std::string& path, int expected_side);

// Dispatcher; x_gt is consulted only for kind == ground_truth.
ImageGrid reconstruct(const ReconstructorSpec& spec, const Sinogram& y, const ProjectorMatrix& K,
                      const ImageGrid* x_gt = nullptr);

}  // namespace ctgraph
